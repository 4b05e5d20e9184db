"""Generate tests/fixtures/edit_corpus.json: five fixture documents and
fifty edit operations that must all apply mechanically.

Run from the repository root:  python3 scripts/make_edit_corpus.py
"""
import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from refine.mockup.dom import DomEdit, apply_edits, canonicalize

DOCUMENTS = {
    "notes": """
<main id="m">
  <header id="hd"><h1 id="title">Team notes</h1><p id="tagline">Shared scratchpad.</p></header>
  <section id="s1">
    <h2 id="s1h">Today</h2>
    <p id="s1p1">First note body.</p>
    <p id="s1p2">Second note body.</p>
    <ul id="s1list"><li id="s1a">alpha</li><li id="s1b">beta</li><li id="s1c">gamma</li></ul>
  </section>
  <section id="s2">
    <h2 id="s2h">Later</h2>
    <p id="s2p1">Backlog item one.</p>
    <p id="s2p2">Backlog item two.</p>
  </section>
  <footer id="ft"><p id="ftp">Synced nightly.</p><p id="ftq">Offline capable.</p></footer>
</main>
""",
    "dashboard": """
<div id="shell">
  <nav id="sidebar">
    <a id="nav-home" href="#home">Home</a>
    <a id="nav-reports" href="#reports">Reports</a>
    <a id="nav-settings" href="#settings">Settings</a>
  </nav>
  <section id="cards">
    <article id="card-a"><h3 id="card-a-h">Open tickets</h3><p id="card-a-v">42</p></article>
    <article id="card-b"><h3 id="card-b-h">On call</h3><p id="card-b-v">R. Alvarez</p></article>
    <article id="card-c"><h3 id="card-c-h">Uptime</h3><p id="card-c-v">99.95%</p></article>
  </section>
  <section id="feed">
    <h2 id="feed-h">Activity</h2>
    <p id="feed-1">Deploy finished.</p>
    <p id="feed-2">Alert acknowledged.</p>
    <p id="feed-3">Backup completed.</p>
  </section>
</div>
""",
    "form": """
<form id="signup">
  <fieldset id="who">
    <label id="name-label" for="name">Name</label>
    <input id="name" name="name" type="text">
    <label id="mail-label" for="mail">Email</label>
    <input id="mail" name="mail" type="email">
  </fieldset>
  <fieldset id="prefs">
    <label id="plan-label" for="plan">Plan</label>
    <select id="plan" name="plan"><option id="opt-free">Free</option><option id="opt-pro">Pro</option></select>
    <p id="plan-help">You can change this later.</p>
  </fieldset>
  <div id="actions"><button id="submit" type="submit">Create account</button><a id="cancel" href="#back">Cancel</a></div>
</form>
""",
    "catalog": """
<section id="catalog">
  <h1 id="cat-h">Field guides</h1>
  <ol id="items">
    <li id="item-1">Mosses of the coast range</li>
    <li id="item-2">Intertidal invertebrates</li>
    <li id="item-3">Raptor silhouettes</li>
    <li id="item-4">Conifer cone key</li>
  </ol>
  <aside id="promo">
    <h2 id="promo-h">Member picks</h2>
    <p id="promo-p">Updated every season.</p>
  </aside>
  <table id="stock">
    <tr id="row-head"><th id="col-title">Title</th><th id="col-n">Copies</th></tr>
    <tr id="row-1"><td id="row-1-t">Mosses</td><td id="row-1-n">3</td></tr>
    <tr id="row-2"><td id="row-2-t">Raptors</td><td id="row-2-n">7</td></tr>
  </table>
</section>
""",
    "reader": """
<article id="story">
  <header id="masthead">
    <h1 id="headline">Quiet harbors</h1>
    <p id="byline">By A. Costa</p>
    <img id="hero" src="hero.png" alt="Harbor at dawn">
  </header>
  <section id="body-text">
    <p id="para-1">The fog lifted before six.</p>
    <p id="para-2">Boats left in pairs.</p>
    <p id="para-3">By noon the pier was empty.</p>
    <blockquote id="pull">Nobody counts the departures.</blockquote>
  </section>
  <section id="related">
    <h2 id="related-h">Related</h2>
    <ul id="related-list"><li id="rel-1">Tide tables</li><li id="rel-2">Ferry routes</li></ul>
  </section>
</article>
""",
}

EDITS = [
    # notes
    ("notes", "replace", "s1p1", '<p id="s1p1">First note, rewritten for clarity.</p>', None),
    ("notes", "remove", "s1b", None, None),
    ("notes", "add", "s1p2", '<p id="s1p3">Third note body.</p>', "after"),
    ("notes", "add", "s2", '<p id="s2lead">Triage before standup.</p>', "first_child"),
    ("notes", "add", "s1list", '<li id="s1d">delta</li>', "last_child"),
    ("notes", "replace", "s1list", '<ol id="s1list"><li id="s1x">one</li><li id="s1y">two</li></ol>', None),
    ("notes", "remove", "tagline", None, None),
    ("notes", "add", "ft", '<aside id="ft-note">Archived weekly.</aside>', "before"),
    ("notes", "replace", "ftp", '<p id="ftp">Synced <em id="ftp-em">hourly</em>.</p>', None),
    ("notes", "add", "m", '<section id="s3"><h2 id="s3h">Done</h2><p id="s3p">Nothing yet.</p></section>', "last_child"),
    # dashboard
    ("dashboard", "add", "nav-reports", '<a id="nav-alerts" href="#alerts">Alerts</a>', "after"),
    ("dashboard", "remove", "card-b", None, None),
    ("dashboard", "replace", "card-a-v", '<p id="card-a-v">45</p>', None),
    ("dashboard", "add", "cards", '<article id="card-d"><h3 id="card-d-h">Queue age</h3><p id="card-d-v">12 min</p></article>', "last_child"),
    ("dashboard", "add", "feed-1", '<p id="feed-0">Release tagged.</p>', "before"),
    ("dashboard", "replace", "sidebar", '<nav id="sidebar"><a id="nav-home" href="#home">Home</a><a id="nav-audit" href="#audit">Audit</a></nav>', None),
    ("dashboard", "remove", "feed-3", None, None),
    ("dashboard", "add", "feed-h", '<p id="feed-sub">Last 24 hours.</p>', "after"),
    ("dashboard", "replace", "card-c", '<article id="card-c"><h3 id="card-c-h">Uptime</h3><p id="card-c-v">99.99%</p></article>', None),
    ("dashboard", "add", "shell", '<footer id="shell-ft">Refreshed live.</footer>', "last_child"),
    # form
    ("form", "add", "mail", '<p id="mail-help">Work address preferred.</p>', "after"),
    ("form", "replace", "plan-help", '<p id="plan-help">Billed monthly; cancel anytime.</p>', None),
    ("form", "remove", "cancel", None, None),
    ("form", "add", "who", '<legend id="who-legend">About you</legend>', "first_child"),
    ("form", "add", "prefs", '<legend id="prefs-legend">Preferences</legend>', "first_child"),
    ("form", "replace", "submit", '<button id="submit" type="submit">Sign up free</button>', None),
    ("form", "add", "plan", '<option id="opt-team">Team</option>', "last_child"),
    ("form", "remove", "plan-help", None, None),
    ("form", "add", "actions", '<p id="tos">By continuing you accept the terms.</p>', "last_child"),
    ("form", "replace", "name-label", '<label id="name-label" for="name">Full name</label>', None),
    # catalog
    ("catalog", "add", "item-2", '<li id="item-2b">Kelp forest field notes</li>', "after"),
    ("catalog", "remove", "item-3", None, None),
    ("catalog", "replace", "promo-p", '<p id="promo-p">Updated every month.</p>', None),
    ("catalog", "add", "stock", '<tr id="row-3"><td id="row-3-t">Conifers</td><td id="row-3-n">5</td></tr>', "last_child"),
    ("catalog", "remove", "row-1", None, None),
    ("catalog", "replace", "cat-h", '<h1 id="cat-h">Field guides and keys</h1>', None),
    ("catalog", "add", "promo", '<p id="promo-cta">Browse the shelf.</p>', "last_child"),
    ("catalog", "add", "items", '<li id="item-0">Start here: reading a key</li>', "first_child"),
    ("catalog", "replace", "row-2", '<tr id="row-2"><td id="row-2-t">Raptors</td><td id="row-2-n">6</td></tr>', None),
    ("catalog", "remove", "promo-h", None, None),
    # reader
    ("reader", "replace", "headline", '<h1 id="headline">Quiet harbors, loud mornings</h1>', None),
    ("reader", "add", "para-2", '<p id="para-2b">The gulls followed anyway.</p>', "after"),
    ("reader", "remove", "pull", None, None),
    ("reader", "add", "masthead", '<p id="dateline">June 14</p>', "last_child"),
    ("reader", "replace", "byline", '<p id="byline">By A. Costa and L. Brennan</p>', None),
    ("reader", "add", "related-list", '<li id="rel-3">Harbor cams</li>', "last_child"),
    ("reader", "remove", "rel-1", None, None),
    ("reader", "add", "body-text", '<p id="para-0">A reconstruction from notes.</p>', "first_child"),
    ("reader", "replace", "related-h", '<h2 id="related-h">Keep reading</h2>', None),
    ("reader", "add", "story", '<footer id="colophon">Set in Caslon.</footer>', "last_child"),
]


def main() -> None:
    corpus = {"documents": {}, "edits": []}
    for name, html in DOCUMENTS.items():
        corpus["documents"][name] = canonicalize(html)
    for doc, op, rid, edited, position in EDITS:
        edit = DomEdit(op=op, reference_element_id=rid, edited_element=edited,
                       position=position,
                       rationale=f"{op} {rid} in {doc}").to_dict()
        applied = apply_edits(corpus["documents"][doc],
                              [DomEdit.from_dict(edit)])
        assert applied != corpus["documents"][doc], (doc, edit)
        corpus["edits"].append({"doc": doc, "edit": edit})
    assert len(corpus["edits"]) == 50, len(corpus["edits"])
    out = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "edit_corpus.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(corpus, indent=2, ensure_ascii=False) + "\n",
                   encoding="utf-8")
    print(f"wrote {out} ({len(corpus['edits'])} edits, "
          f"{len(corpus['documents'])} documents)")


if __name__ == "__main__":
    main()
