import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from refine.context import DIMENSIONS, DesignContext
from refine.errors import (
    AllAbsentError,
    LengthMismatchError,
    NoEligiblePapersError,
    ZeroNormError,
)
from refine.index import DimensionEmbedding, IndexEntry, PaperIndex
from refine.retrieval import (
    MockupQuery,
    build_query,
    cosine_similarity,
    rank_papers,
    sum_valid_dimensions,
)

DIM = 4


def _embeddings(values: dict, dim=DIM):
    """values maps dimension name -> vector; missing names are absent."""
    out = []
    for name in DIMENSIONS:
        vec = values.get(name)
        out.append(DimensionEmbedding(
            dimension_name=name,
            vector=tuple(vec) if vec is not None else (0.0,) * dim,
            is_present=vec is not None,
        ))
    return tuple(out)


def _query(values: dict, dim=DIM):
    ctx = DesignContext(origin="mockup", **{
        name: f"{name} text" for name in values})
    return MockupQuery(context=ctx, embeddings=_embeddings(values, dim))


def _entry(paper_id, values: dict, dim=DIM):
    ctx = DesignContext(**{name: f"{name} text" for name in values})
    return IndexEntry(
        paper_id=paper_id,
        title=f"Paper {paper_id}",
        context=ctx,
        embeddings=_embeddings(values, dim),
    )


def _index(entries, dim=DIM):
    return PaperIndex(entries=tuple(entries), embedding_dim=dim,
                      created_at="2024-01-01T00:00:00Z")


class TestQueryValidation:
    def test_dimension_order_enforced(self):
        embeddings = _embeddings({"domain": (1, 0, 0, 0)})
        shuffled = embeddings[::-1]
        with pytest.raises(ValueError, match="in order"):
            MockupQuery(context=DesignContext(domain="x", origin="mockup"),
                        embeddings=shuffled)

    def test_all_absent_query_rejected(self):
        with pytest.raises(AllAbsentError):
            MockupQuery(context=DesignContext(origin="mockup"),
                        embeddings=_embeddings({}))

    def test_build_query_requires_a_present_dimension(self, stub):
        with pytest.raises(AllAbsentError):
            build_query(DesignContext(origin="mockup"), stub)

    def test_build_query_marks_absent_dimensions(self, stub):
        query = build_query(
            DesignContext(target_user="nurses", origin="mockup"), stub)
        flags = {e.dimension_name: e.is_present for e in query.embeddings}
        assert flags["target_user"] is True
        assert not any(v for k, v in flags.items() if k != "target_user")
        absent = [e.vector for e in query.embeddings if not e.is_present]
        assert len(set(absent)) == 1  # all share the empty-string embedding


class TestCosine:
    def test_parallel(self):
        assert cosine_similarity((1, 2, 3), (2, 4, 6)) == pytest.approx(1.0)

    def test_antiparallel(self):
        assert cosine_similarity((1, 0), (-1, 0)) == pytest.approx(-1.0)

    def test_orthogonal(self):
        assert cosine_similarity((1, 0), (0, 1)) == pytest.approx(0.0)

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatchError):
            cosine_similarity((1, 0), (1, 0, 0))

    def test_zero_norm(self):
        with pytest.raises(ZeroNormError):
            cosine_similarity((0, 0), (1, 0))

    @given(st.lists(st.floats(min_value=-1e3, max_value=1e3), min_size=2,
                    max_size=8).filter(lambda v: any(abs(x) > 1e-3 for x in v)))
    @settings(max_examples=50, deadline=None)
    def test_always_in_unit_interval(self, vec):
        scaled = [x * 3.0 for x in vec]
        value = cosine_similarity(vec, scaled)
        assert -1.0 <= value <= 1.0
        assert value == pytest.approx(1.0, abs=1e-9)


class TestSumValidDimensions:
    def test_only_shared_present_dimensions_summed(self):
        query = _query({"target_user": (1, 0, 0, 0), "domain": (0, 1, 0, 0)})
        entry = _entry("p1", {"domain": (0, 0, 2, 0), "metric": (9, 9, 9, 9)})
        s_m, s_p, valid = sum_valid_dimensions(query, entry)
        assert valid == ["domain"]
        assert s_m == (0.0, 1.0, 0.0, 0.0)
        assert s_p == (0.0, 0.0, 2.0, 0.0)

    def test_sums_accumulate_across_dimensions(self):
        query = _query({"target_user": (1, 0, 0, 0), "domain": (0, 1, 0, 0)})
        entry = _entry("p1", {"target_user": (1, 1, 0, 0), "domain": (0, 0, 1, 1)})
        s_m, s_p, valid = sum_valid_dimensions(query, entry)
        assert valid == ["target_user", "domain"]
        assert s_m == (1.0, 1.0, 0.0, 0.0)
        assert s_p == (1.0, 1.0, 1.0, 1.0)

    def test_no_overlap_returns_empty(self):
        query = _query({"target_user": (1, 0, 0, 0)})
        entry = _entry("p1", {"metric": (1, 0, 0, 0)})
        assert sum_valid_dimensions(query, entry) == ((), (), [])


def _reference_rank(query, index, k):
    """Straight-line reimplementation used to cross-check rank_papers."""
    scored = []
    for entry in index.entries:
        s_m, s_p, valid = sum_valid_dimensions(query, entry)
        if not valid:
            continue
        scored.append((entry.paper_id, cosine_similarity(s_m, s_p)))
    scored.sort(key=lambda t: (-t[1], t[0]))
    return scored[:k]


class TestRankPapers:
    def test_matches_reference_on_random_instances(self):
        rng = random.Random(42)
        for trial in range(20):
            entries = []
            for i in range(rng.randint(2, 12)):
                values = {
                    name: [rng.uniform(-1, 1) for _ in range(DIM)]
                    for name in rng.sample(DIMENSIONS, rng.randint(1, 6))
                }
                entries.append(_entry(f"p{i:02d}", values))
            index = _index(entries)
            q_values = {
                name: [rng.uniform(-1, 1) for _ in range(DIM)]
                for name in rng.sample(DIMENSIONS, rng.randint(1, 6))
            }
            query = _query(q_values)
            k = rng.randint(1, len(entries) + 2)
            try:
                got = rank_papers(query, index, k)
            except NoEligiblePapersError:
                assert _reference_rank(query, index, k) == []
                continue
            want = _reference_rank(query, index, k)
            assert [r.paper_id for r in got] == [pid for pid, _ in want]
            assert [r.similarity for r in got] == pytest.approx(
                [sim for _, sim in want], abs=1e-12)

    def test_ties_break_by_ascending_paper_id(self):
        vec = {"domain": (1.0, 0.0, 0.0, 0.0)}
        entries = [_entry(pid, vec) for pid in ("pz", "pa", "pm")]
        index = _index(entries)
        got = rank_papers(_query(vec), index, 3)
        assert [r.paper_id for r in got] == ["pa", "pm", "pz"]
        assert all(r.similarity == pytest.approx(1.0) for r in got)

    def test_entries_without_overlap_are_excluded(self):
        entries = [
            _entry("p1", {"domain": (1, 0, 0, 0)}),
            _entry("p2", {"metric": (1, 0, 0, 0)}),
        ]
        got = rank_papers(_query({"domain": (1, 0, 0, 0)}), _index(entries), 5)
        assert [r.paper_id for r in got] == ["p1"]

    def test_k_slices_the_ranking(self):
        entries = [
            _entry(f"p{i}", {"domain": (1.0, float(i) / 10, 0.0, 0.0)})
            for i in range(6)
        ]
        full = rank_papers(_query({"domain": (1, 0, 0, 0)}), _index(entries), 6)
        top2 = rank_papers(_query({"domain": (1, 0, 0, 0)}), _index(entries), 2)
        assert [r.paper_id for r in top2] == [r.paper_id for r in full[:2]]

    def test_similarity_is_clamped(self):
        entries = [_entry("p1", {"domain": (1, 0, 0, 0)})]
        got = rank_papers(_query({"domain": (1, 0, 0, 0)}), _index(entries), 1)
        assert -1.0 <= got[0].similarity <= 1.0

    def test_valid_dimensions_reported_in_canonical_order(self):
        entries = [_entry("p1", {
            "target_user": (1, 0, 0, 0), "metric": (0, 1, 0, 0)})]
        query = _query({
            "metric": (1, 0, 0, 0), "target_user": (0, 1, 0, 0)})
        got = rank_papers(query, _index(entries), 1)
        assert got[0].valid_dimensions == ("target_user", "metric")

    def test_k_must_be_positive(self):
        entries = [_entry("p1", {"domain": (1, 0, 0, 0)})]
        with pytest.raises(ValueError):
            rank_papers(_query({"domain": (1, 0, 0, 0)}), _index(entries), 0)

    def test_empty_index(self):
        with pytest.raises(NoEligiblePapersError):
            rank_papers(_query({"domain": (1, 0, 0, 0)}), _index([]), 1)

    def test_no_entry_shares_a_dimension(self):
        entries = [_entry("p1", {"metric": (1, 0, 0, 0)})]
        with pytest.raises(NoEligiblePapersError):
            rank_papers(_query({"domain": (1, 0, 0, 0)}), _index(entries), 1)

    def test_dim_mismatch_between_query_and_index(self):
        entries = [_entry("p1", {"domain": (1, 0, 0, 0)})]
        query = _query({"domain": (1, 0, 0)}, dim=3)
        with pytest.raises(LengthMismatchError):
            rank_papers(query, _index(entries), 1)

    def test_zero_norm_sum_raises(self):
        entries = [_entry("p1", {"domain": (0.0, 0.0, 0.0, 0.0)})]
        with pytest.raises(ZeroNormError):
            rank_papers(_query({"domain": (1, 0, 0, 0)}), _index(entries), 1)

    def test_results_carry_entry_payload(self, stub, small_index):
        index, _ = small_index
        query = build_query(
            DesignContext(target_user="nurses", domain="inpatient care",
                          origin="mockup"), stub)
        got = rank_papers(query, index, 3)
        assert len(got) == 3
        for paper in got:
            entry = index.get(paper.paper_id)
            assert paper.title == entry.title
            assert paper.implications == entry.implications
            assert paper.implication_embeddings == entry.implication_embeddings
            assert paper.valid_dimensions

    def test_end_to_end_against_small_index(self, stub, small_index):
        index, _ = small_index
        query = build_query(
            DesignContext(target_user="nurses", domain="inpatient care",
                          modality="mobile app", origin="mockup"), stub)
        got = rank_papers(query, index, len(index.entries))
        want = _reference_rank(query, index, len(index.entries))
        assert [r.paper_id for r in got] == [pid for pid, _ in want]
        assert [r.similarity for r in got] == pytest.approx(
            [sim for _, sim in want], abs=1e-12)
