"""Theming retrieved implications by agglomerative clustering.

Average-linkage (UPGMA) hierarchical clustering over cosine distances,
with the cluster count chosen to maximize the mean silhouette score.
All tie-breaks are total, so clustering is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import NoImplicationsError, SingleClusterError, ZeroNormError
from .papers import DesignImplication
from .retrieval import RankedPaper, cosine_similarity

# Upper bound on the cluster count considered by model selection.
DEFAULT_MAX_CLUSTERS = 10


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric matrix of pairwise cosine distances (1 - cosine), in [0, 2]."""

    values: tuple[tuple[float, ...], ...]

    @property
    def n(self) -> int:
        return len(self.values)

    def d(self, i: int, j: int) -> float:
        return self.values[i][j]


@dataclass(frozen=True)
class ClusteringResult:
    labels: tuple[int, ...]
    n_best: int
    silhouette_by_k: dict[int, float] = field(default_factory=dict)


@dataclass(frozen=True)
class InsightCluster:
    """One theme: its implications plus the translated texts layered on top."""

    cluster_id: str
    implications: tuple[DesignImplication, ...]
    title: str | None = None
    compare_contrast: str | None = None
    relations: tuple[str, ...] = ()
    key_insights: str | None = None
    tailored_insight: str | None = None
    action_items: tuple = ()


def cosine_distance_matrix(embeddings) -> DistanceMatrix:
    """d(i,j) = 1 - cosine_similarity(e_i, e_j); diagonal exactly 0."""
    n = len(embeddings)
    if n < 2:
        raise ValueError("a distance matrix needs at least 2 embeddings")
    rows = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            d = 1.0 - cosine_similarity(embeddings[i], embeddings[j])
            rows[i][j] = d
            rows[j][i] = d
    return DistanceMatrix(values=tuple(tuple(row) for row in rows))


def agglomerative_cluster(dist: DistanceMatrix, k: int) -> tuple[int, ...]:
    """Average-linkage agglomeration from n singletons down to k clusters.

    At each step the pair with minimal average inter-cluster distance
    merges; equal distances break toward the lexicographically smallest
    (lowest-member, lowest-member) pair. Labels are numbered by each
    final cluster's smallest member index.
    """
    n = dist.n
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")

    members: list[list[int]] = [[i] for i in range(n)]
    # Average pairwise distance between current clusters, updated by the
    # weighted (Lance-Williams) rule on each merge.
    d = [list(row) for row in dist.values]

    while len(members) > k:
        best = None
        for a in range(len(members)):
            for b in range(a + 1, len(members)):
                key = (d[a][b], members[a][0], members[b][0])
                if best is None or key < best[0]:
                    best = (key, a, b)
        _, a, b = best
        size_a, size_b = len(members[a]), len(members[b])
        merged_row = [
            (size_a * d[a][c] + size_b * d[b][c]) / (size_a + size_b)
            for c in range(len(members))
        ]
        members[a] = sorted(members[a] + members[b])
        d[a] = merged_row
        for c in range(len(members)):
            d[c][a] = merged_row[c]
        d[a][a] = 0.0
        del members[b]
        del d[b]
        for row in d:
            del row[b]

    ordered = sorted(range(len(members)), key=lambda c: members[c][0])
    labels = [0] * n
    for label, c in enumerate(ordered):
        for point in members[c]:
            labels[point] = label
    return tuple(labels)


def mean_silhouette(labels, dist: DistanceMatrix) -> float:
    """Mean of per-point silhouettes s_i = (b_i - a_i) / max(a_i, b_i).

    a_i is the mean distance to the point's own cluster, b_i the smallest
    mean distance to any other cluster. Singleton points contribute 0, as
    does the coincident-point case a_i = b_i = 0.
    """
    n = dist.n
    if len(labels) != n:
        raise ValueError("labels must cover every point")
    clusters: dict[int, list[int]] = {}
    for i, label in enumerate(labels):
        clusters.setdefault(label, []).append(i)
    if len(clusters) < 2:
        raise SingleClusterError("silhouette needs at least two clusters")

    total = 0.0
    for i, label in enumerate(labels):
        own = clusters[label]
        if len(own) == 1:
            continue  # s_i = 0
        a = sum(dist.d(i, j) for j in own if j != i) / (len(own) - 1)
        b = min(
            sum(dist.d(i, j) for j in other) / len(other)
            for other_label, other in clusters.items()
            if other_label != label
        )
        denom = max(a, b)
        if denom > 0.0:
            total += (b - a) / denom
    return total / n


def select_cluster_count(embeddings, n_max: int = DEFAULT_MAX_CLUSTERS) -> ClusteringResult:
    """Pick the cluster count in {2, ..., min(n_max, n-1)} maximizing mean
    silhouette; ties go to the smallest k.

    One embedding yields a single cluster; two yield one cluster each
    (the silhouette candidate range is empty, so no score is computed).
    """
    n = len(embeddings)
    if n == 0:
        raise ValueError("select_cluster_count needs at least one embedding")
    if n == 1:
        return ClusteringResult(labels=(0,), n_best=1)
    if n == 2:
        return ClusteringResult(labels=(0, 1), n_best=2)

    dist = cosine_distance_matrix(embeddings)
    scores: dict[int, float] = {}
    labels_by_k: dict[int, tuple[int, ...]] = {}
    for k in range(2, min(n_max, n - 1) + 1):
        labels = agglomerative_cluster(dist, k)
        labels_by_k[k] = labels
        scores[k] = mean_silhouette(labels, dist)

    n_best = min(scores)
    for k in sorted(scores):
        if scores[k] > scores[n_best]:
            n_best = k
    return ClusteringResult(labels=labels_by_k[n_best], n_best=n_best,
                            silhouette_by_k=scores)


def build_clusters(ranked: list[RankedPaper],
                   n_max: int = DEFAULT_MAX_CLUSTERS) -> list[InsightCluster]:
    """Pool every retained paper's implications and cluster them.

    Clusters are ordered by descending size, then by their smallest
    implication_id, and handed ids "c1", "c2", ...
    """
    pooled: list[DesignImplication] = []
    embeddings = []
    for paper in ranked:
        for imp, emb in zip(paper.implications, paper.implication_embeddings):
            pooled.append(imp)
            embeddings.append(emb)
    if not pooled:
        raise NoImplicationsError("retained papers carry no implications")

    result = select_cluster_count(embeddings, n_max=n_max)
    groups: dict[int, list[DesignImplication]] = {}
    for imp, label in zip(pooled, result.labels):
        groups.setdefault(label, []).append(imp)

    ordered = sorted(
        groups.values(),
        key=lambda imps: (-len(imps), min(i.implication_id for i in imps)),
    )
    return [
        InsightCluster(cluster_id=f"c{pos + 1}", implications=tuple(imps))
        for pos, imps in enumerate(ordered)
    ]
