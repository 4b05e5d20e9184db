import { h } from '../dom.js'
import type { PreviewToggle } from '../state.js'
import type { ActionItem, PreviewResponse, PreviewResult } from '../types.js'

export type PreviewHandlers = {
  onBack: () => void
  onToggle: (which: PreviewToggle) => void
  // Resolves with the confirmed state; rejects when the server said no.
  onToggleBookmark: (itemId: string) => Promise<boolean>
}

export type PreviewProps = {
  item: ActionItem
  bookmarked: boolean
  toggle: PreviewToggle
  // null while the preview is still being fetched or reconstruction runs.
  preview: PreviewResponse | null
  pendingText: string | null
}

export function renderPreview(
  props: PreviewProps,
  handlers: PreviewHandlers,
): HTMLElement {
  const back = h('button', { class: 'back-button', type: 'button' }, 'Back')
  back.addEventListener('click', handlers.onBack)

  const header = h('div', { class: 'preview-header' }, [
    back,
    bookmarkStar(props, handlers),
    h('p', { class: 'item-text' }, props.item.text),
  ])

  const body = props.item.visually_representable
    ? representableBody(props, handlers)
    : textOnlyBody()
  return h('section', { class: 'pane pane-preview' }, [header, body])
}

function bookmarkStar(
  props: PreviewProps,
  handlers: PreviewHandlers,
): HTMLElement {
  const star = h('button', { class: 'star', type: 'button' }, '')
  let current = props.bookmarked
  const paint = () => {
    star.textContent = current ? '★' : '☆'
    star.className = current ? 'star bookmarked' : 'star'
    star.title = current ? 'Remove bookmark' : 'Bookmark this item'
  }
  paint()
  star.addEventListener('click', () => {
    // Optimistic: flip right away, put it back if the request fails.
    const previous = current
    current = !current
    paint()
    handlers.onToggleBookmark(props.item.item_id).then(
      confirmed => {
        current = confirmed
        paint()
      },
      () => {
        current = previous
        paint()
      },
    )
  })
  return star
}

function textOnlyBody(): HTMLElement {
  return h('div', { class: 'text-only-card' }, [
    h('h3', {}, 'No visual preview'),
    h('p', {},
      'This item describes a change that does not map onto any single '
      + 'screen element, so there is nothing to patch into the mockup. '
      + 'Apply it from the text above.'),
  ])
}

function representableBody(
  props: PreviewProps,
  handlers: PreviewHandlers,
): HTMLElement {
  if (props.preview === null) {
    return h('div', { class: 'preview-pending' }, [
      h('p', { class: 'progress-text' },
        props.pendingText ?? 'Preparing preview'),
    ])
  }
  const frames = props.preview.results.map(result =>
    screenPair(result, props.toggle))
  return h('div', { class: 'preview-body' }, [
    toggleControl(props.toggle, frames, handlers),
    h('div', { class: 'preview-screens' }, frames.map(f => f.root)),
  ])
}

type FramePair = {
  root: HTMLElement
  show: (which: PreviewToggle) => void
}

function toggleControl(
  initial: PreviewToggle,
  frames: FramePair[],
  handlers: PreviewHandlers,
): HTMLElement {
  const before = h('button', { class: 'toggle-before', type: 'button' },
    'Before')
  const after = h('button', { class: 'toggle-after', type: 'button' },
    'After')
  const paint = (which: PreviewToggle) => {
    before.className = which === 'before'
      ? 'toggle-before active' : 'toggle-before'
    after.className = which === 'after'
      ? 'toggle-after active' : 'toggle-after'
  }
  const flip = (which: PreviewToggle) => {
    // Both frames are already in the document; switching is a class
    // change, never a reload.
    paint(which)
    for (const frame of frames) frame.show(which)
    handlers.onToggle(which)
  }
  before.addEventListener('click', () => flip('before'))
  after.addEventListener('click', () => flip('after'))
  paint(initial)
  return h('div', { class: 'preview-toggle' }, [before, after])
}

function screenPair(result: PreviewResult, initial: PreviewToggle): FramePair {
  const beforeFrame = frame(result.before_html, 'before', initial)
  const afterFrame = frame(result.after_html, 'after', initial)
  const root = h('div', { class: 'screen-pair' }, [
    h('div', { class: 'screen-pair-header' }, [
      h('span', { class: 'screen-id' }, result.screen_id),
      downloadLink(result),
    ]),
    beforeFrame,
    afterFrame,
    editsList(result),
  ])
  return {
    root,
    show: which => {
      beforeFrame.className = frameClass('before', which)
      afterFrame.className = frameClass('after', which)
    },
  }
}

function frameClass(side: PreviewToggle, shown: PreviewToggle): string {
  return side === shown
    ? `preview-frame frame-${side}`
    : `preview-frame frame-${side} hidden`
}

function frame(
  html: string,
  side: PreviewToggle,
  initial: PreviewToggle,
): HTMLIFrameElement {
  const el = h('iframe', {
    class: frameClass(side, initial),
    // Scripts stay disabled even though the markup is generated locally.
    sandbox: '',
    title: `${side} preview`,
  }) as HTMLIFrameElement
  el.srcdoc = html
  return el
}

function downloadLink(result: PreviewResult): HTMLElement {
  const href = 'data:text/html;charset=utf-8,'
    + encodeURIComponent(result.after_html)
  return h('a', {
    class: 'download-after',
    href,
    download: `${result.screen_id}-after.html`,
  }, 'Download patched HTML')
}

function editsList(result: PreviewResult): HTMLElement {
  if (!result.edits_applied.length) {
    return h('p', { class: 'hint' }, 'No edits were applied.')
  }
  return h('ul', { class: 'edits' }, result.edits_applied.map(edit =>
    h('li', {}, [
      h('span', { class: 'edit-op' }, edit.op),
      h('span', { class: 'edit-rationale' }, ` ${edit.rationale}`),
    ])))
}
