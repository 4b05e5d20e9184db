// Keyword chips for cluster rows, derived from the context dimensions
// of the papers behind each cluster.

import type { Cluster, ContextPayload, RankedPaper } from './types.js'
import { DIMENSIONS } from './types.js'

const MAX_CHIPS = 6

export function clusterChips(cluster: Cluster, ranked: RankedPaper[]): string[] {
  const contexts = new Map<string, ContextPayload>()
  for (const paper of ranked) contexts.set(paper.paper_id, paper.context)

  const chips: string[] = []
  const seen = new Set<string>()
  const seenPapers = new Set<string>()
  for (const implication of cluster.implications) {
    if (seenPapers.has(implication.paper_id)) continue
    seenPapers.add(implication.paper_id)
    const context = contexts.get(implication.paper_id)
    if (!context) continue
    for (const dimension of DIMENSIONS) {
      const value = context[dimension]
      if (!value || seen.has(value)) continue
      seen.add(value)
      chips.push(value)
      if (chips.length === MAX_CHIPS) return chips
    }
  }
  return chips
}
