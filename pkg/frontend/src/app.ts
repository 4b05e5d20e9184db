// The studio panel. Owns one API client, one view-state store, and the
// payload caches; every pane renders from those and never computes an
// insight itself.

import { ApiClient, ApiError, clustersFromSnapshot, isPending } from './api.js'
import type { FetchLike } from './api.js'
import { clear, h } from './dom.js'
import { Store } from './state.js'
import type { ViewState } from './state.js'
import type {
  Cluster,
  ContextPayload,
  PreviewResponse,
  Progress,
  RankedPaper,
  SourcesResponse,
} from './types.js'
import { renderContextForm } from './views/context.js'
import { renderClusterDetail } from './views/detail.js'
import { renderClusterList } from './views/clusters.js'
import { renderPreview } from './views/preview.js'
import { renderProgress } from './views/progress.js'
import { filesToBase64, renderUpload } from './views/upload.js'

export type AppOptions = {
  baseUrl: string
  fetchFn?: FetchLike
  pollMs?: number
}

const PENDING_ATTEMPTS = 150

export class App {
  readonly store = new Store()
  private readonly api: ApiClient
  private readonly pollMs: number

  // Everything below mirrors server state; the browser never derives it.
  private context: ContextPayload | null = null
  private contextWarnings: string[] = []
  private clusters: Cluster[] = []
  private ranked: RankedPaper[] = []
  private bookmarks = new Set<string>()
  private previews = new Map<string, PreviewResponse>()
  private sources = new Map<string, SourcesResponse>()
  private lastProgress: Progress | null = null
  private pendingText: string | null = null
  private busyNote: string | null = null
  private errorText: string | null = null

  constructor(private readonly root: HTMLElement, options: AppOptions) {
    this.api = new ApiClient(options.baseUrl, options.fetchFn)
    this.pollMs = options.pollMs ?? 1500
  }

  // Entry point. Restores the session named in the location hash, if
  // any, so a reload lands back where the user was.
  async start(): Promise<void> {
    const sessionId = sessionFromHash(window.location.hash)
    if (sessionId === null) {
      this.render()
      return
    }
    try {
      await this.restore(sessionId)
    } catch (error) {
      window.location.hash = ''
      this.errorText = describe(error)
      this.render()
    }
  }

  private async restore(sessionId: string): Promise<void> {
    const snapshot = await this.api.getSnapshot(sessionId)
    this.context = snapshot.confirmed_context ?? snapshot.mockup.context
    this.contextWarnings = snapshot.warnings
    this.clusters = clustersFromSnapshot(snapshot)
    this.ranked = snapshot.ranked
    this.bookmarks = new Set(snapshot.bookmarks)
    this.previews = new Map(Object.entries(snapshot.previews).map(
      ([itemId, results]) => [itemId, { item_id: itemId, results }]))
    this.sources = new Map()
    const pane = snapshot.stage === 'created'
      || snapshot.stage === 'context_ready'
      ? 'context_review' : 'cluster_list'
    this.store.patch({
      sessionId,
      pane,
      selectedCluster: null,
      selectedItem: null,
      progress: { stage: snapshot.stage, step: null },
    })
    this.render()
  }

  // Upload pane: read the chosen screens and open a session.

  private async startSession(files: File[]): Promise<void> {
    this.errorText = null
    this.busyNote = 'Reading screens'
    this.render()
    try {
      const screens = await filesToBase64(files)
      const created = await this.api.createSession(screens)
      this.context = created.context
      this.contextWarnings = created.warnings
      this.store.patch({ sessionId: created.session_id, pane: 'context_review' })
      window.location.hash = `#/s/${created.session_id}`
    } catch (error) {
      this.errorText = describe(error)
    } finally {
      this.busyNote = null
      this.render()
    }
  }

  // Context review: confirm (possibly edited) dimensions, then run
  // retrieval and translation. Confirming again throws away everything
  // built on the previous context.

  private async confirmContext(context: ContextPayload): Promise<void> {
    const sessionId = this.requireSession()
    this.errorText = null
    try {
      const confirmed = await this.api.putContext(sessionId, context)
      this.context = confirmed.context
      this.clusters = []
      this.ranked = []
      this.bookmarks.clear()
      this.previews.clear()
      this.sources.clear()
      this.store.resetDownstream()
      this.render()
      await this.withProgress(async () => {
        const retrieved = await this.api.retrieve(sessionId)
        this.ranked = retrieved.ranked
        this.clusters = retrieved.clusters
        this.render()
        const translated = await this.api.translate(sessionId)
        this.clusters = translated.clusters
      })
    } catch (error) {
      this.errorText = describe(error)
      if (this.clusters.length === 0) {
        this.store.patch({ pane: 'context_review' })
      }
    }
    this.render()
  }

  // Cluster navigation.

  private openCluster(clusterId: string): void {
    this.store.patch({
      pane: 'cluster_detail',
      selectedCluster: clusterId,
      selectedItem: null,
    })
    this.render()
  }

  private backToList(): void {
    this.store.patch({
      pane: 'cluster_list',
      selectedCluster: null,
      selectedItem: null,
      previewToggle: 'before',
    })
    this.render()
  }

  private editContext(): void {
    this.store.patch({
      pane: 'context_review',
      selectedCluster: null,
      selectedItem: null,
      previewToggle: 'before',
    })
    this.render()
  }

  private async toggleSources(open: boolean): Promise<void> {
    const state = this.store.get()
    this.store.patch({ pane: open ? 'sources' : 'cluster_detail' })
    this.render()
    const clusterId = state.selectedCluster
    if (open && clusterId !== null && !this.sources.has(clusterId)) {
      try {
        const sources = await this.api.getSources(this.requireSession(), clusterId)
        this.sources.set(clusterId, sources)
      } catch (error) {
        this.errorText = describe(error)
      }
      this.render()
    }
  }

  private async retryTranslate(): Promise<void> {
    const sessionId = this.requireSession()
    this.errorText = null
    try {
      await this.withProgress(async () => {
        const translated = await this.api.translate(sessionId)
        this.clusters = translated.clusters
      })
    } catch (error) {
      this.errorText = describe(error)
    }
    this.render()
  }

  // Preview.

  private openItem(itemId: string): void {
    this.pendingText = null
    this.store.patch({ selectedItem: itemId, previewToggle: 'before' })
    this.render()
    const item = this.findItem(itemId)
    if (item !== null && item.visually_representable
        && !this.previews.has(itemId)) {
      void this.loadPreview(itemId)
    }
  }

  private async loadPreview(itemId: string): Promise<void> {
    try {
      const preview = await this.fetchPreviewWhenReady(itemId)
      this.previews.set(itemId, preview)
    } catch (error) {
      this.errorText = describe(error)
    }
    if (this.store.get().selectedItem === itemId) this.render()
  }

  private async fetchPreviewWhenReady(itemId: string): Promise<PreviewResponse> {
    const sessionId = this.requireSession()
    for (let attempt = 0; attempt < PENDING_ATTEMPTS; attempt++) {
      try {
        return await this.api.getPreview(sessionId, itemId)
      } catch (error) {
        if (!isPending(error)) throw error
        const retryAfter = error instanceof ApiError ? error.retryAfter : null
        await this.refreshProgress()
        this.pendingText = reconstructionLabel(this.lastProgress)
        if (this.store.get().selectedItem === itemId) this.render()
        await delay(retryAfter !== null ? retryAfter * 1000 : this.pollMs)
      }
    }
    throw new Error('the preview did not become ready in time')
  }

  private closeItem(): void {
    this.store.patch({ selectedItem: null, previewToggle: 'before' })
    this.render()
  }

  // Bookmarks flip optimistically; the server response settles the
  // final state and a failure puts the old one back.
  private async toggleBookmark(itemId: string): Promise<boolean> {
    const sessionId = this.requireSession()
    const had = this.bookmarks.has(itemId)
    if (had) this.bookmarks.delete(itemId)
    else this.bookmarks.add(itemId)
    const inPreview = this.store.get().selectedItem === itemId
    if (!inPreview) this.render()
    try {
      const result = await this.api.toggleBookmark(sessionId, itemId)
      if (result.bookmark) this.bookmarks.add(itemId)
      else this.bookmarks.delete(itemId)
      if (!inPreview) this.render()
      return result.bookmark
    } catch (error) {
      if (had) this.bookmarks.add(itemId)
      else this.bookmarks.delete(itemId)
      this.errorText = describe(error)
      this.render()
      throw error
    }
  }

  // Progress polling around the long calls.

  private async withProgress<T>(work: () => Promise<T>): Promise<T> {
    let settled = false
    const tick = async () => {
      await this.refreshProgress()
      if (!settled) this.render()
    }
    const timer = setInterval(() => { void tick() }, this.pollMs)
    try {
      return await work()
    } finally {
      settled = true
      clearInterval(timer)
      await this.refreshProgress()
    }
  }

  private async refreshProgress(): Promise<void> {
    const state = this.store.get()
    if (state.sessionId === null) return
    try {
      const progress = await this.api.getProgress(state.sessionId)
      this.lastProgress = progress
      this.store.patch({
        progress: { stage: progress.stage, step: progress.step },
      })
    } catch {
      // keep the last strip; the surrounding call surfaces real errors
    }
  }

  // Rendering.

  private render(): void {
    const state = this.store.get()
    clear(this.root)
    this.root.append(this.header(), this.pane(state))
  }

  private header(): HTMLElement {
    const children: HTMLElement[] = [
      h('h1', { class: 'app-title' }, 'Refine studio'),
      renderProgress(this.lastProgress),
    ]
    if (this.busyNote !== null) {
      children.push(h('p', { class: 'busy-note' }, this.busyNote))
    }
    if (this.errorText !== null) {
      children.push(h('p', { class: 'error-banner' }, this.errorText))
    }
    return h('header', { class: 'app-header' }, children)
  }

  private pane(state: ViewState): HTMLElement {
    switch (state.pane) {
      case 'upload':
        return renderUpload({
          onFiles: files => { void this.startSession(files) },
        })
      case 'context_review':
        return renderContextForm(
          { context: this.context, warnings: this.contextWarnings },
          { onConfirm: context => { void this.confirmContext(context) } },
        )
      case 'cluster_list':
        return renderClusterList(this.clusters, this.ranked, {
          onSelect: clusterId => this.openCluster(clusterId),
          onRetry: () => { void this.retryTranslate() },
          onEditContext: () => this.editContext(),
        })
      case 'cluster_detail':
      case 'sources':
        return this.detailPane(state)
    }
  }

  private detailPane(state: ViewState): HTMLElement {
    const cluster = this.clusters.find(
      c => c.cluster_id === state.selectedCluster)
    if (cluster === undefined) {
      return h('section', { class: 'pane' },
        [h('p', { class: 'error-banner' }, 'That cluster is gone.')])
    }
    if (state.selectedItem !== null) {
      const item = this.findItem(state.selectedItem)
      if (item !== null) {
        return renderPreview({
          item,
          bookmarked: this.bookmarks.has(item.item_id),
          toggle: state.previewToggle,
          preview: this.previews.get(item.item_id) ?? null,
          pendingText: this.pendingText,
        }, {
          onBack: () => this.closeItem(),
          onToggle: which => { this.store.patch({ previewToggle: which }) },
          onToggleBookmark: itemId => this.toggleBookmark(itemId),
        })
      }
    }
    return renderClusterDetail({
      cluster,
      bookmarks: this.bookmarks,
      sources: this.sources.get(cluster.cluster_id) ?? null,
      sourcesOpen: state.pane === 'sources',
      selectedItem: state.selectedItem,
    }, {
      onBack: () => this.backToList(),
      onSelectItem: itemId => this.openItem(itemId),
      onToggleBookmark: itemId => { void this.toggleBookmark(itemId) },
      onToggleSources: open => { void this.toggleSources(open) },
      onRetry: () => { void this.retryTranslate() },
    })
  }

  private findItem(itemId: string) {
    for (const cluster of this.clusters) {
      const item = cluster.action_items.find(i => i.item_id === itemId)
      if (item !== undefined) return item
    }
    return null
  }

  private requireSession(): string {
    const sessionId = this.store.get().sessionId
    if (sessionId === null) throw new Error('no session yet')
    return sessionId
  }
}

export function sessionFromHash(hash: string): string | null {
  const match = /^#\/s\/([A-Za-z0-9_-]+)$/.exec(hash)
  return match === null ? null : match[1]
}

function reconstructionLabel(progress: Progress | null): string {
  if (progress === null) return 'Reconstructing screens'
  const ready = progress.screens
    .filter(s => s.reconstruction_status === 'ready').length
  const base = `Reconstructing screens (${ready}/${progress.screens.length} ready)`
  return progress.step ? `${base}: ${progress.step}` : base
}

function describe(error: unknown): string {
  if (error instanceof ApiError) return `${error.kind}: ${error.message}`
  if (error instanceof Error) return error.message
  return String(error)
}

function delay(ms: number): Promise<void> {
  return new Promise(resolve => setTimeout(resolve, ms))
}
