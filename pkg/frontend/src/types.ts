// Wire types for the /v1 API. Field names mirror the JSON exactly.

export type Dimension =
  | 'target_user'
  | 'domain'
  | 'modality'
  | 'pain_point'
  | 'client'
  | 'metric'

// Canonical dimension order; forms and chips iterate in this order.
export const DIMENSIONS: Dimension[] = [
  'target_user', 'domain', 'modality', 'pain_point', 'client', 'metric',
]

export const DIMENSION_LABELS: Record<Dimension, string> = {
  target_user: 'Target user',
  domain: 'Domain',
  modality: 'Modality',
  pain_point: 'Pain point',
  client: 'Client',
  metric: 'Metric',
}

export type Stage =
  | 'created'
  | 'context_ready'
  | 'retrieved'
  | 'clustered'
  | 'translated'

export type ContextPayload = {
  target_user: string | null
  domain: string | null
  modality: string | null
  pain_point: string | null
  client: string | null
  metric: string | null
}

export type SessionCreated = {
  session_id: string
  stage: Stage
  context: ContextPayload | null
  screen_ids: string[]
  warnings: string[]
}

export type ContextConfirmed = {
  session_id: string
  stage: Stage
  context: ContextPayload
}

export type RankedPaper = {
  paper_id: string
  title: string
  similarity: number
  valid_dimensions: Dimension[]
  context: ContextPayload
}

export type ActionItem = {
  item_id: string
  cluster_id: string
  text: string
  target_screen_ids: string[]
  visually_representable: boolean
  bookmark: boolean
}

export type Implication = {
  implication_id: string
  paper_id: string
  text: string
  source_paragraph: string
}

export type Cluster = {
  cluster_id: string
  size: number
  title: string | null
  compare_contrast: string | null
  relations: string[]
  key_insights: string | null
  tailored_insight: string | null
  implications: Implication[]
  action_items: ActionItem[]
}

export type RetrieveResponse = {
  session_id: string
  stage: Stage
  ranked: RankedPaper[]
  clusters: Cluster[]
}

export type ClustersResponse = {
  session_id: string
  stage: Stage
  clusters: Cluster[]
}

export type SourceGroup = {
  paper_id: string
  title: string
  implications: { implication_id: string, text: string, source_paragraph: string }[]
}

export type SourcesResponse = {
  cluster_id: string
  groups: SourceGroup[]
}

export type DomEdit = {
  op: string
  reference_element_id: string
  edited_element: string | null
  position: string | null
  rationale: string
}

export type PreviewResult = {
  item_id: string
  screen_id: string
  before_html: string
  after_html: string
  edits_applied: DomEdit[]
  warnings: string[]
}

export type PreviewResponse = {
  item_id: string
  results: PreviewResult[]
}

export type BookmarkResponse = {
  item_id: string
  bookmark: boolean
}

export type ScreenStatus = {
  screen_id: string
  width: number
  height: number
  reconstruction_status: 'pending' | 'ready' | 'failed'
}

export type Progress = {
  session_id: string
  stage: Stage
  busy: boolean
  step: string | null
  screens: ScreenStatus[]
  bookmarks: string[]
  timings: Record<string, number>
  warnings: string[]
}

// GET /v1/sessions/{id} returns the session file shape. Cluster entries
// there carry no size and their per-item bookmark flags are snapshots;
// the top-level bookmarks list is authoritative.
export type SnapshotCluster = Omit<Cluster, 'size'>

export type SessionSnapshot = {
  session_id: string
  created_at: string
  stage: Stage
  confirmed_context: (ContextPayload & { origin?: string }) | null
  mockup: {
    mockup_id: string
    screens: (ScreenStatus & { png_b64?: string, reconstructed_html?: string | null })[]
    context: (ContextPayload & { origin?: string }) | null
  }
  ranked: RankedPaper[]
  clusters: SnapshotCluster[]
  previews: Record<string, PreviewResult[]>
  bookmarks: string[]
  timings: Record<string, number>
  warnings: string[]
}
