type Probed<T> = T | null | undefined | false

export async function waitFor<T>(
  label: string,
  probe: () => Probed<T> | Promise<Probed<T>>,
  timeoutMs = 15000,
): Promise<T> {
  const deadline = Date.now() + timeoutMs
  for (;;) {
    const value = await probe()
    if (value) return value
    if (Date.now() > deadline) throw new Error(`timed out waiting for ${label}`)
    await new Promise(resolve => setTimeout(resolve, 50))
  }
}

export function jsonResponse(
  status: number,
  body: unknown,
  headers: Record<string, string> = {},
): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { 'content-type': 'application/json', ...headers },
  })
}

export function tick(): Promise<void> {
  return new Promise(resolve => setTimeout(resolve, 0))
}
