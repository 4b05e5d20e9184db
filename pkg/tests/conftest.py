import os
import socket

import pytest

from corpus import write_screens, write_tei_corpus
from stubmodel import StubModel

from refine.index import build_index, load_index, save_index
from refine.papers import ingest_paper
from refine.session import new_session, run_full


@pytest.fixture(scope="session", autouse=True)
def no_network():
    """Every test runs with network sockets disabled; providers are stubs
    or recorded fixtures, never live services.  AF_UNIX stays available
    because asyncio event loops build their self-pipe from a local
    socketpair."""
    real_socket, real_create = socket.socket, socket.create_connection

    class GuardedSocket(real_socket):  # type: ignore[misc, valid-type]
        def __init__(self, family=socket.AF_INET, *args, **kwargs):
            if family != socket.AF_UNIX:
                raise RuntimeError("network access attempted during tests")
            super().__init__(family, *args, **kwargs)

    def guard(*args, **kwargs):
        raise RuntimeError("network access attempted during tests")

    socket.socket = GuardedSocket  # type: ignore[misc]
    socket.create_connection = guard  # type: ignore[assignment]
    try:
        yield
    finally:
        socket.socket, socket.create_connection = real_socket, real_create


@pytest.fixture(scope="session", autouse=True)
def pinned_clock():
    """Pin generated timestamps so artifacts are byte-reproducible."""
    previous = os.environ.get("SOURCE_DATE_EPOCH")
    os.environ["SOURCE_DATE_EPOCH"] = "1700000000"
    try:
        yield
    finally:
        if previous is None:
            os.environ.pop("SOURCE_DATE_EPOCH", None)
        else:
            os.environ["SOURCE_DATE_EPOCH"] = previous


@pytest.fixture(scope="session")
def stub():
    return StubModel()


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory):
    """Six papers (one with no context dimensions) and two screens."""
    root = tmp_path_factory.mktemp("small-corpus")
    papers = write_tei_corpus(root / "papers", count=6, seed=10, all_absent=1)
    screens = write_screens(root / "screens", count=2, seed=3)
    return {"root": root, "papers": papers, "screens": screens}


@pytest.fixture(scope="session")
def small_records(stub, small_corpus):
    return [ingest_paper(path, stub) for path in small_corpus["papers"]]


@pytest.fixture(scope="session")
def small_index(stub, small_records, tmp_path_factory):
    built = build_index(small_records, stub)
    path = tmp_path_factory.mktemp("index") / "papers.idx"
    save_index(built, path)
    return load_index(path), path


@pytest.fixture(scope="session")
def screen_bytes(small_corpus):
    return [path.read_bytes() for path in small_corpus["screens"]]


@pytest.fixture
def full_session(stub, small_index, screen_bytes):
    """A fresh end-to-end session over the small corpus."""
    index, _ = small_index
    session = new_session(screen_bytes, session_id="testsession000001")
    run_full(session, index, stub)
    return session
