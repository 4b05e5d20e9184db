import { clusterChips } from '../chips.js'
import { h } from '../dom.js'
import type { Cluster, RankedPaper } from '../types.js'

export type ClusterListHandlers = {
  onSelect: (clusterId: string) => void
  onRetry: () => void
  onEditContext: () => void
}

export function renderClusterList(
  clusters: Cluster[],
  ranked: RankedPaper[],
  handlers: ClusterListHandlers,
): HTMLElement {
  const edit = h('button', { class: 'edit-context', type: 'button' },
    'Edit context')
  edit.addEventListener('click', handlers.onEditContext)
  const rows = clusters.map((cluster, i) =>
    clusterRow(cluster, i, ranked, handlers))
  return h('section', { class: 'pane pane-clusters' }, [
    h('div', { class: 'pane-header' }, [
      h('h2', {}, 'Insight clusters'),
      edit,
    ]),
    h('div', { class: 'cluster-list' }, rows),
  ])
}

function clusterRow(
  cluster: Cluster,
  index: number,
  ranked: RankedPaper[],
  handlers: ClusterListHandlers,
): HTMLElement {
  const chips = clusterChips(cluster, ranked).map(chip =>
    h('span', { class: 'chip' }, chip))
  const failed = cluster.title === null

  const header = h('div', { class: 'cluster-row-header' }, [
    h('span', { class: 'cluster-row-title' },
      cluster.title ?? `Cluster ${index + 1} (not translated)`),
    h('span', { class: 'cluster-row-size' },
      `${cluster.size} implication${cluster.size === 1 ? '' : 's'}`),
  ])

  const row = h('div', {
    class: failed ? 'cluster-row failed' : 'cluster-row',
    'data-cluster-id': cluster.cluster_id,
  }, [header, h('div', { class: 'chip-row' }, chips)])

  if (failed) {
    const retry = h('button', { class: 'retry-button', type: 'button' },
      'Retry translation')
    retry.addEventListener('click', event => {
      event.stopPropagation()
      handlers.onRetry()
    })
    row.append(retry)
  }
  row.addEventListener('click', () => handlers.onSelect(cluster.cluster_id))
  return row
}
