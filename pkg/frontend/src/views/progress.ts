import { h } from '../dom.js'
import type { Progress } from '../types.js'

// The strip names the running sub-step (as reported by the service)
// instead of showing an anonymous spinner.
export function renderProgress(progress: Progress | null): HTMLElement {
  if (progress === null) {
    return h('div', { class: 'progress-strip idle' }, '')
  }
  const ready = progress.screens
    .filter(s => s.reconstruction_status === 'ready').length
  const parts: string[] = [`stage: ${progress.stage}`]
  if (progress.step) parts.push(progress.step)
  if (progress.screens.length) {
    parts.push(`${ready}/${progress.screens.length} screens reconstructed`)
  }
  return h('div', {
    class: progress.busy ? 'progress-strip busy' : 'progress-strip idle',
  }, [
    h('span', { class: 'progress-text' }, parts.join(' | ')),
  ])
}
