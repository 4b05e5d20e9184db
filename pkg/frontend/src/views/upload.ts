import { h } from '../dom.js'

export type UploadHandlers = {
  onFiles: (files: File[]) => void
}

export function renderUpload(handlers: UploadHandlers): HTMLElement {
  const input = h('input', {
    class: 'upload-input',
    type: 'file',
    accept: 'image/png',
    multiple: true,
  }) as HTMLInputElement
  input.addEventListener('change', () => {
    const files = Array.from(input.files ?? [])
    if (files.length) handlers.onFiles(files)
  })

  return h('section', { class: 'pane pane-upload' }, [
    h('h2', {}, 'Upload mockup screens'),
    h('p', { class: 'hint' },
      'Pick the PNG screens of your mockup, in order. The service reads '
      + 'the design context out of them for you to review.'),
    input,
  ])
}

export async function filesToBase64(files: File[]): Promise<string[]> {
  return Promise.all(files.map(async file => {
    const buffer = await file.arrayBuffer()
    return bytesToBase64(new Uint8Array(buffer))
  }))
}

function bytesToBase64(bytes: Uint8Array): string {
  // Chunked so large screens don't overflow the argument list.
  let binary = ''
  const step = 0x8000
  for (let i = 0; i < bytes.length; i += step) {
    binary += String.fromCharCode(...bytes.subarray(i, i + step))
  }
  return btoa(binary)
}
