import { h } from '../dom.js'
import type { ActionItem, Cluster, SourcesResponse } from '../types.js'

export type ClusterDetailHandlers = {
  onBack: () => void
  onSelectItem: (itemId: string) => void
  onToggleBookmark: (itemId: string) => void
  onToggleSources: (open: boolean) => void
  onRetry: () => void
}

export type ClusterDetailProps = {
  cluster: Cluster
  bookmarks: Set<string>
  // null while collapsed or loading; the pane state decides visibility.
  sources: SourcesResponse | null
  sourcesOpen: boolean
  selectedItem: string | null
}

export function renderClusterDetail(
  props: ClusterDetailProps,
  handlers: ClusterDetailHandlers,
): HTMLElement {
  const { cluster } = props
  const back = h('button', { class: 'back-button', type: 'button' }, 'Back')
  back.addEventListener('click', handlers.onBack)

  const children: HTMLElement[] = [back]
  if (cluster.title === null) {
    children.push(failedHeader(handlers))
  } else {
    children.push(
      h('h2', { class: 'cluster-title' }, cluster.title),
      section('section-compare', 'Compare and contrast',
        cluster.compare_contrast ?? ''),
      section('section-insights', 'Key insights', cluster.key_insights ?? '',
        cluster.relations),
      section('section-tailored', 'For your context',
        cluster.tailored_insight ?? ''),
    )
    children.push(actionItems(cluster.action_items, props, handlers))
  }
  children.push(sourcesBlock(props, handlers))
  return h('section', { class: 'pane pane-detail' }, children)
}

function failedHeader(handlers: ClusterDetailHandlers): HTMLElement {
  const retry = h('button', { class: 'retry-button', type: 'button' },
    'Retry translation')
  retry.addEventListener('click', handlers.onRetry)
  return h('div', { class: 'cluster-failed' }, [
    h('h2', {}, 'Translation failed for this cluster'),
    h('p', { class: 'hint' },
      'The grouped implications are still available under sources below.'),
    retry,
  ])
}

function section(
  cls: string,
  heading: string,
  text: string,
  relations: string[] = [],
): HTMLElement {
  const children: HTMLElement[] = [
    h('h3', {}, heading),
    h('p', { class: 'section-text' }, text),
  ]
  if (relations.length) {
    children.push(h('ul', { class: 'relations' },
      relations.map(r => h('li', {}, r))))
  }
  return h('div', { class: `section ${cls}` }, children)
}

function actionItems(
  items: ActionItem[],
  props: ClusterDetailProps,
  handlers: ClusterDetailHandlers,
): HTMLElement {
  const rows = items.map(item => itemRow(item, props, handlers))
  return h('div', { class: 'section section-items' }, [
    h('h3', {}, 'Action items'),
    h('div', { class: 'item-list' },
      rows.length ? rows : [h('p', { class: 'hint' }, 'No action items.')]),
  ])
}

function itemRow(
  item: ActionItem,
  props: ClusterDetailProps,
  handlers: ClusterDetailHandlers,
): HTMLElement {
  const bookmarked = props.bookmarks.has(item.item_id)
  const star = h('button', {
    class: bookmarked ? 'star bookmarked' : 'star',
    type: 'button',
    title: bookmarked ? 'Remove bookmark' : 'Bookmark this item',
  }, bookmarked ? '★' : '☆')
  star.addEventListener('click', event => {
    event.stopPropagation()
    handlers.onToggleBookmark(item.item_id)
  })

  const badge = h('span', {
    class: item.visually_representable ? 'badge visual' : 'badge text-only',
  }, item.visually_representable ? 'preview' : 'text only')

  const selected = props.selectedItem === item.item_id
  const row = h('div', {
    class: selected ? 'item-row selected' : 'item-row',
    'data-item-id': item.item_id,
  }, [star, h('span', { class: 'item-text' }, item.text), badge])
  row.addEventListener('click', () => handlers.onSelectItem(item.item_id))
  return row
}

function sourcesBlock(
  props: ClusterDetailProps,
  handlers: ClusterDetailHandlers,
): HTMLElement {
  const papers = new Set(props.cluster.implications.map(i => i.paper_id))
  const toggle = h('button', { class: 'sources-toggle', type: 'button' },
    `${props.sourcesOpen ? 'Hide' : 'Show'} sources `
    + `(${papers.size} paper${papers.size === 1 ? '' : 's'})`)
  toggle.addEventListener('click', () =>
    handlers.onToggleSources(!props.sourcesOpen))

  const children: HTMLElement[] = [h('h3', {}, 'Sources'), toggle]
  if (props.sourcesOpen) {
    children.push(props.sources === null
      ? h('p', { class: 'hint' }, 'Loading sources')
      : sourceGroups(props.sources))
  }
  return h('div', { class: 'section section-sources' }, children)
}

function sourceGroups(sources: SourcesResponse): HTMLElement {
  return h('div', { class: 'source-groups' }, sources.groups.map(group =>
    h('div', { class: 'source-group' }, [
      h('h4', { class: 'source-paper' }, group.title || group.paper_id),
      h('ul', { class: 'source-implications' }, group.implications.map(imp =>
        h('li', { title: imp.source_paragraph }, imp.text))),
    ])))
}
