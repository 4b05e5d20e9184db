// Typed client for the /v1 API. Pure transport: every insight shown in
// the studio is computed server side and rendered here as received.

import type {
  BookmarkResponse,
  Cluster,
  ClustersResponse,
  ContextConfirmed,
  ContextPayload,
  PreviewResponse,
  Progress,
  RetrieveResponse,
  SessionCreated,
  SessionSnapshot,
  SnapshotCluster,
  SourcesResponse,
} from './types.js'

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>

export class ApiError extends Error {
  // kind carries the server's error type name, e.g. "AllAbsentError".
  constructor(
    readonly status: number,
    readonly kind: string,
    detail: string,
    readonly retryAfter: number | null = null,
  ) {
    super(detail)
    this.name = 'ApiError'
  }
}

export function isPending(error: unknown): boolean {
  return error instanceof ApiError && error.kind === 'ReconstructionPendingError'
}

export function isAllAbsent(error: unknown): boolean {
  return error instanceof ApiError && error.kind === 'AllAbsentError'
}

export class ApiClient {
  private fetchFn: FetchLike

  constructor(readonly baseUrl: string, fetchFn?: FetchLike) {
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init))
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method }
    if (body !== undefined) {
      init.headers = { 'content-type': 'application/json' }
      init.body = JSON.stringify(body)
    }
    const resp = await this.fetchFn(this.baseUrl + path, init)
    if (!resp.ok) {
      throw await toApiError(resp)
    }
    return resp.json() as Promise<T>
  }

  createSession(screens: string[], sessionId?: string): Promise<SessionCreated> {
    const body: Record<string, unknown> = { screens }
    if (sessionId) body.session_id = sessionId
    return this.request('POST', '/v1/sessions', body)
  }

  async getSnapshot(sessionId: string): Promise<SessionSnapshot> {
    const wrapped = await this.request<{ session: SessionSnapshot }>(
      'GET', `/v1/sessions/${sessionId}`)
    return wrapped.session
  }

  getProgress(sessionId: string): Promise<Progress> {
    return this.request('GET', `/v1/sessions/${sessionId}/progress`)
  }

  putContext(sessionId: string, context: ContextPayload): Promise<ContextConfirmed> {
    return this.request('PUT', `/v1/sessions/${sessionId}/context`, context)
  }

  retrieve(sessionId: string, k?: number): Promise<RetrieveResponse> {
    const query = k ? `?k=${k}` : ''
    return this.request('POST', `/v1/sessions/${sessionId}/retrieve${query}`)
  }

  translate(sessionId: string): Promise<ClustersResponse> {
    return this.request('POST', `/v1/sessions/${sessionId}/translate`)
  }

  getClusters(sessionId: string): Promise<ClustersResponse> {
    return this.request('GET', `/v1/sessions/${sessionId}/clusters`)
  }

  getSources(sessionId: string, clusterId: string): Promise<SourcesResponse> {
    return this.request('GET', `/v1/sessions/${sessionId}/clusters/${clusterId}/sources`)
  }

  getPreview(sessionId: string, itemId: string): Promise<PreviewResponse> {
    return this.request('GET', `/v1/sessions/${sessionId}/items/${itemId}/preview`)
  }

  toggleBookmark(sessionId: string, itemId: string): Promise<BookmarkResponse> {
    return this.request('POST', `/v1/sessions/${sessionId}/items/${itemId}/bookmark`)
  }

  health(): Promise<{ status: string }> {
    return this.request('GET', '/v1/health')
  }
}

async function toApiError(resp: Response): Promise<ApiError> {
  let kind = 'HttpError'
  let detail = `${resp.status} ${resp.statusText}`
  try {
    const body = await resp.json()
    if (body && typeof body.error === 'string') kind = body.error
    if (body && typeof body.detail === 'string') detail = body.detail
  } catch {
    // non-JSON error body; keep the status line
  }
  const header = resp.headers.get('retry-after')
  const retryAfter = header === null ? null : Number(header)
  return new ApiError(resp.status, kind, detail,
    Number.isFinite(retryAfter) ? retryAfter : null)
}

export function clustersFromSnapshot(snapshot: SessionSnapshot): Cluster[] {
  const bookmarked = new Set(snapshot.bookmarks)
  return snapshot.clusters.map((cluster: SnapshotCluster) => ({
    ...cluster,
    size: cluster.implications.length,
    action_items: cluster.action_items.map(item => ({
      ...item,
      bookmark: bookmarked.has(item.item_id),
    })),
  }))
}
