"""Synthetic test inputs: TEI papers and PNG screens.

Everything is seeded, so a given (seed, count) always produces the same
bytes. Papers carry machine-readable markers that the scripted model in
stubmodel.py reads back out, which makes extraction exact and lets tests
control which dimensions are present. Screens embed the same kind of
marker in a PNG tEXt chunk.
"""
from __future__ import annotations

import io
import random
from pathlib import Path
from xml.sax.saxutils import escape

from PIL import Image
from PIL.PngImagePlugin import PngInfo

TARGET_USERS = ["nurses", "teachers", "field technicians", "travelers",
                "financial analysts", "new parents", "warehouse staff"]
DOMAINS = ["clinical handoff", "remote learning", "equipment maintenance",
           "trip planning", "portfolio review", "infant care", "inventory"]
MODALITIES = ["mobile app", "tablet kiosk", "desktop dashboard",
              "voice assistant", "wearable display"]
PAIN_POINTS = ["alert fatigue", "context switching", "form abandonment",
               "slow lookups", "missed notifications", "duplicate entry"]
CLIENTS = ["a regional hospital", "a school district", "a logistics firm",
           "a travel agency", "a retail bank"]
METRICS = ["task completion time", "error rate", "weekly retention",
           "support ticket volume", "conversion rate"]

_POOLS = {
    "target_user": TARGET_USERS,
    "domain": DOMAINS,
    "modality": MODALITIES,
    "pain_point": PAIN_POINTS,
    "client": CLIENTS,
    "metric": METRICS,
}

_TOPICS = ["handoff notes", "checklist flows", "status displays",
           "onboarding tours", "error recovery", "offline syncing",
           "progress feedback", "notification grouping"]

CONTEXT_MARKER_END = "|end|"


def context_marker(dims: dict) -> str:
    """Inline encoding of a six-dimension assignment; empty means absent."""
    body = ";".join(f"{name}={dims.get(name) or ''}"
                    for name in ("target_user", "domain", "modality",
                                 "pain_point", "client", "metric"))
    return f"Context markers: {body}."


def pick_dims(rng: random.Random, min_present: int = 1) -> dict:
    """A random dimension assignment with at least min_present values."""
    names = list(_POOLS)
    present = rng.sample(names, rng.randint(min_present, len(names)))
    return {name: rng.choice(_POOLS[name]) if name in present else ""
            for name in names}


def make_tei(seed: int, dims: dict | None = None,
             n_implications: int | None = None) -> bytes:
    """One synthetic TEI paper. Implication sentences contain "should"."""
    rng = random.Random(seed * 7919 + 13)
    if dims is None:
        dims = pick_dims(rng)
    topic = rng.choice(_TOPICS)
    title = f"Study {seed:03d}: supporting {topic}"
    if n_implications is None:
        n_implications = rng.randint(1, 3)

    intro = (f"We studied {topic} with {len(_TOPICS)} participating teams "
             f"over {rng.randint(2, 9)} weeks.")
    marker_para = context_marker(dims)
    implication_paras = []
    for i in range(n_implications):
        verb = rng.choice(["surface", "group", "defer", "highlight", "confirm"])
        noun = rng.choice(["status changes", "pending items", "recent edits",
                           "conflicts", "handoff summaries"])
        implication_paras.append(
            f"Finding {i + 1}: participants lost track of {noun}. "
            f"Designers should {verb} {noun} close to the primary task view "
            f"(condition {seed}-{i}).")

    body_paras = "\n".join(
        f'        <p xml:id="p{seed}.{i}">{escape(text)}</p>'
        for i, text in enumerate([intro, marker_para]))
    finding_paras = "\n".join(
        f"        <p>{escape(text)}</p>" for text in implication_paras)
    bibl = f"Prior work {rng.randint(1990, 2020)}."

    xml = f"""<?xml version="1.0" encoding="UTF-8"?>
<TEI xmlns="http://www.tei-c.org/ns/1.0">
  <teiHeader>
    <fileDesc>
      <titleStmt><title>{escape(title)}</title></titleStmt>
    </fileDesc>
    <profileDesc>
      <abstract><p>{escape(f"A field study of {topic}.")}</p></abstract>
    </profileDesc>
  </teiHeader>
  <text>
    <body>
      <div>
        <head>Introduction</head>
{body_paras}
      </div>
      <div>
        <head>Findings</head>
{finding_paras}
      </div>
      <figure><figDesc>{escape(f"Overview of the {topic} prototype.")}</figDesc></figure>
    </body>
    <back>
      <div>
        <listBibl><bibl>{escape(bibl)}</bibl></listBibl>
      </div>
    </back>
  </text>
</TEI>
"""
    return xml.encode("utf-8")


def write_tei_corpus(directory: Path, count: int, seed: int = 0,
                     all_absent: int = 0) -> list[Path]:
    """Write `count` papers; the last `all_absent` of them carry no
    context dimension (they must be excluded from any index)."""
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for i in range(count):
        dims = None
        if i >= count - all_absent:
            dims = {name: "" for name in _POOLS}
        path = directory / f"paper{seed + i:03d}.tei.xml"
        path.write_bytes(make_tei(seed + i, dims=dims))
        paths.append(path)
    return paths


def make_png(seed: int, dims: dict | None = None,
             size: tuple[int, int] = (96, 64)) -> bytes:
    """A small deterministic PNG. When dims is given, the assignment is
    embedded in a tEXt chunk for the scripted model to read."""
    rng = random.Random(seed * 104729 + 7)
    img = Image.new("RGB", size, (rng.randint(0, 255), rng.randint(0, 255),
                                  rng.randint(0, 255)))
    for x in range(0, size[0], 8):
        for y in range(0, size[1], 8):
            img.putpixel((x, y), (255 - x % 256, y % 256, seed % 256))
    info = PngInfo()
    if dims is not None:
        body = ";".join(f"{name}={dims.get(name) or ''}"
                        for name in ("target_user", "domain", "modality",
                                     "pain_point", "client", "metric"))
        info.add_text("refinectx", body + CONTEXT_MARKER_END)
    buf = io.BytesIO()
    img.save(buf, format="PNG", pnginfo=info)
    return buf.getvalue()


def mockup_dims(seed: int = 0) -> dict:
    """The context a marked screen set advertises; overlaps the pools the
    papers draw from, so retrieval has signal."""
    rng = random.Random(seed * 31 + 5)
    return {
        "target_user": rng.choice(TARGET_USERS),
        "domain": rng.choice(DOMAINS),
        "modality": rng.choice(MODALITIES),
        "pain_point": rng.choice(PAIN_POINTS),
        "client": "",
        "metric": rng.choice(METRICS),
    }


def write_screens(directory: Path, count: int, seed: int = 0,
                  dims: dict | None = None) -> list[Path]:
    """Write `count` screens; the first carries the context marker."""
    directory.mkdir(parents=True, exist_ok=True)
    if dims is None:
        dims = mockup_dims(seed)
    paths = []
    for i in range(count):
        path = directory / f"screen{i + 1}.png"
        path.write_bytes(make_png(seed * 100 + i, dims=dims if i == 0 else None))
        paths.append(path)
    return paths
