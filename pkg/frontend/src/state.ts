// View state for the studio panel. The store holds navigation state
// only; fetched payloads live on the app. Transitions that would render
// an impossible pane throw, so wiring mistakes fail fast.

import type { Stage } from './types.js'

export type Pane =
  | 'upload'
  | 'context_review'
  | 'cluster_list'
  | 'cluster_detail'
  | 'sources'

export type PreviewToggle = 'before' | 'after'

export type ViewState = {
  sessionId: string | null
  pane: Pane
  selectedCluster: string | null
  selectedItem: string | null
  previewToggle: PreviewToggle
  progress: { stage: Stage | null, step: string | null }
}

export function initialState(): ViewState {
  return {
    sessionId: null,
    pane: 'upload',
    selectedCluster: null,
    selectedItem: null,
    previewToggle: 'before',
    progress: { stage: null, step: null },
  }
}

type Listener = (state: ViewState) => void

export class Store {
  private state: ViewState = initialState()
  private listeners: Listener[] = []

  get(): ViewState {
    return this.state
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener)
    return () => {
      this.listeners = this.listeners.filter(l => l !== listener)
    }
  }

  patch(partial: Partial<ViewState>): ViewState {
    const next = { ...this.state, ...partial }
    validate(next)
    this.state = next
    for (const listener of this.listeners) listener(next)
    return next
  }

  // Confirming a context invalidates everything derived from the old
  // one, so navigation falls back to the list and the selections and
  // toggle go back to their defaults.
  resetDownstream(): ViewState {
    return this.patch({
      pane: 'cluster_list',
      selectedCluster: null,
      selectedItem: null,
      previewToggle: 'before',
    })
  }
}

function validate(next: ViewState): void {
  if ((next.pane === 'cluster_detail' || next.pane === 'sources')
      && next.selectedCluster === null) {
    throw new Error(`pane ${next.pane} requires a selected cluster`)
  }
  if (next.selectedItem !== null && next.selectedCluster === null) {
    throw new Error('a selected item requires a selected cluster')
  }
  if (next.selectedItem === null && next.previewToggle !== 'before') {
    throw new Error('the preview toggle needs a selected item')
  }
}
