"""Record a replayable fixture set for running the HTTP API without a
live model: a small TEI corpus, its index, four PNG screens, and a
fixtures.jsonl covering every provider call the studio flow makes
(create, reconstruct, confirm, retrieve, translate, preview each
representable item).

Run from the repository root:

    python3 scripts/make_ui_fixtures.py --out /tmp/ui-fixtures

then serve it:

    refine serve --config /tmp/ui-fixtures/config.json

The frontend test suite runs this script itself, so the fixtures always
match the installed pipeline.
"""
import argparse
import json
import sys
import time
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))
sys.path.insert(0, str(REPO / "tests"))

from fastapi.testclient import TestClient

from corpus import write_screens, write_tei_corpus
from refine.config import Config
from refine.index import build_index, save_index
from refine.papers import ingest_paper
from refine.providers import FixtureProvider, FixtureStore
from refine.service import SessionManager, create_app
from stubmodel import StubModel

PAPER_COUNT = 24
PAPER_SEED = 42
SCREEN_COUNT = 4
SCREEN_SEED = 7

# The value the UI tests type into the metric field before re-confirming;
# recorded here so the replay store has the second pipeline run too.
EDITED_METRIC = "daily retention"


def build_fixture_index(out: Path, recorder) -> Path:
    papers = write_tei_corpus(out / "papers", count=PAPER_COUNT,
                              seed=PAPER_SEED, all_absent=1)
    records = [ingest_paper(path, recorder) for path in papers]
    index = build_index(records, recorder)
    index_path = out / "papers.idx"
    save_index(index, index_path)
    return index_path


def wait_idle(client: TestClient, session_id: str, timeout: float = 60.0) -> dict:
    deadline = time.monotonic() + timeout
    while True:
        progress = client.get(f"/v1/sessions/{session_id}/progress").json()
        statuses = {s["reconstruction_status"] for s in progress["screens"]}
        if not progress["busy"] and statuses <= {"ready", "failed"}:
            assert statuses == {"ready"}, f"reconstruction failed: {progress}"
            return progress
        assert time.monotonic() < deadline, f"stuck: {progress}"
        time.sleep(0.05)


def run_pipeline(client: TestClient, session_id: str, confirm: dict) -> dict:
    """Confirm a context and walk every read the studio makes after it."""
    put = client.put(f"/v1/sessions/{session_id}/context", json=confirm)
    assert put.status_code == 200, put.text

    retrieved = client.post(f"/v1/sessions/{session_id}/retrieve")
    assert retrieved.status_code == 200, retrieved.text

    translated = client.post(f"/v1/sessions/{session_id}/translate")
    assert translated.status_code == 200, translated.text
    clusters = translated.json()["clusters"]

    for cluster in clusters:
        sources = client.get(
            f"/v1/sessions/{session_id}/clusters/{cluster['cluster_id']}/sources")
        assert sources.status_code == 200, sources.text
        for item in cluster["action_items"]:
            if not item["visually_representable"]:
                continue
            preview = client.get(
                f"/v1/sessions/{session_id}/items/{item['item_id']}/preview")
            assert preview.status_code == 200, preview.text

    return translated.json()


def drive_studio_flow(client: TestClient, screens: list[Path]) -> dict:
    """Make exactly the HTTP calls the studio makes, so the recorded
    digests cover a replay_strict serve: once with the extracted context
    as-is, once with the metric edited (the re-confirm path)."""
    import base64

    encoded = [base64.b64encode(p.read_bytes()).decode("ascii")
               for p in screens]
    created = client.post("/v1/sessions", json={"screens": encoded})
    assert created.status_code == 201, created.text
    body = created.json()
    session_id = body["session_id"]
    assert body["context"], "screen marker did not extract"

    wait_idle(client, session_id)

    confirm = {name: (value or None) for name, value in body["context"].items()}
    payload = run_pipeline(client, session_id, confirm)

    edited = dict(confirm)
    edited["metric"] = EDITED_METRIC
    reconfirmed = run_pipeline(client, session_id, edited)
    assert reconfirmed["clusters"], "re-confirmed context produced no clusters"

    record_markerless_flow(client, encoded[1:], confirm)

    return payload


def record_markerless_flow(client: TestClient, encoded: list[str],
                            confirm: dict) -> None:
    """A session over the screens without the context marker: extraction
    comes up empty, the user types the context in by hand."""
    created = client.post("/v1/sessions", json={"screens": encoded})
    assert created.status_code == 201, created.text
    body = created.json()
    assert body["context"] is None, "markerless screens still extracted"
    assert body["warnings"], "expected a warning about the empty context"

    wait_idle(client, body["session_id"])
    payload = run_pipeline(client, body["session_id"], confirm)
    assert payload["clusters"], "manual context produced no clusters"


def check_coverage(payload: dict) -> None:
    """The UI tests lean on these shapes; fail here, not there."""
    clusters = payload["clusters"]
    assert len(clusters) >= 2, f"want >=2 clusters, got {len(clusters)}"
    translated = [c for c in clusters if c["title"]]
    assert translated, "no cluster carries translated content"
    for cluster in translated:
        for key in ("title", "compare_contrast", "key_insights",
                    "tailored_insight"):
            assert cluster[key], f"cluster {cluster['cluster_id']} lacks {key}"
    items = [i for c in clusters for i in c["action_items"]]
    assert any(i["visually_representable"] for i in items)
    assert any(not i["visually_representable"] for i in items)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", required=True, type=Path,
                        help="Directory to write fixtures into.")
    args = parser.parse_args()
    out = args.out
    out.mkdir(parents=True, exist_ok=True)

    fixtures = out / "fixtures.jsonl"
    fixtures.unlink(missing_ok=True)
    recorder = FixtureProvider(FixtureStore(fixtures, mode="record"),
                               inner=StubModel())

    index_path = build_fixture_index(out, recorder)
    screens = write_screens(out / "screens", count=SCREEN_COUNT,
                            seed=SCREEN_SEED)

    config = Config(index_path=str(index_path),
                    data_dir=str(out / "record-data"),
                    top_k=8, n_max=10, workers=2)
    manager = SessionManager(config, provider=recorder)
    try:
        with TestClient(create_app(manager=manager)) as client:
            payload = drive_studio_flow(client, screens)
    finally:
        manager.shutdown()
    check_coverage(payload)

    (out / "config.json").write_text(json.dumps({
        "index_path": str(index_path),
        "data_dir": str(out / "data"),
        "fixture_path": str(fixtures),
        "fixture_mode": "replay_strict",
        "top_k": 8,
        "n_max": 10,
        "workers": 2,
    }, indent=2) + "\n", encoding="utf-8")

    n_items = sum(len(c["action_items"]) for c in payload["clusters"])
    print(f"recorded {len(payload['clusters'])} clusters, {n_items} action "
          f"items -> {out}")


if __name__ == "__main__":
    main()
