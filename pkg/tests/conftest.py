import pytest

from patent_analogs import clp, ingest, synthetic
from patent_analogs.coordinator import Workstation
from patent_analogs.store import DocumentStore
from patent_analogs.trainer import TrainingConfig

# subsampling off: the synthetic vocabulary is tiny, so every word is "frequent"
FIXTURE_TRAINING = TrainingConfig(dim=32, window=5, negatives=5, epochs=10, min_count=1, subsample=0.0, seed=7)


def as_text(doc_id, text):
    return ingest.ExtractedText(doc_id, text, ingest.detect_language(text))


def c7_task(patents, query_text, seed=7, k=20):
    return {
        "correlation_id": f"fixture-{seed}",
        "payload": {
            "documents": [{"id": p.id, "text": p.text, "title": p.title, "ipc_class": p.ipc_class}
                          for p in patents],
            "query": {"id": "new-patent", "text": query_text, "title": "Новий пристрій"},
            "k": k,
            "training": {**FIXTURE_TRAINING.to_json(), "seed": seed},
            "fields": {"applicant": "Іваненко І.І."},
        },
    }


@pytest.fixture
def store(tmp_path):
    return DocumentStore(tmp_path / "store")


@pytest.fixture(scope="session")
def two_clusters():
    return synthetic.make_patents(seed=0)


@pytest.fixture(scope="session")
def query_text():
    import random
    return synthetic.make_text(random.Random(1234), "vymiriuvannia", 10)


@pytest.fixture(scope="session")
def trained_workstation(tmp_path_factory, two_clusters, query_text):
    """A workstation that already ran the full analog-search function once."""
    ws = Workstation(DocumentStore(tmp_path_factory.mktemp("ws")))
    envelope = ws.execute_function("C_7", c7_task(two_clusters, query_text))
    return ws, envelope


ACCEPTANCE = {}


@pytest.fixture
def criterion(request):
    """Record one acceptance criterion's outcome for the summary table."""
    def record(number, title):
        ACCEPTANCE[number] = [title, "FAIL", ""]
        return ACCEPTANCE[number]
    yield record


def pytest_runtest_makereport(item, call):
    if call.when == "call" and "criterion" in item.fixturenames:
        for entry in ACCEPTANCE.values():
            if entry[1] == "FAIL" and not entry[2]:
                entry[1] = "FAIL" if call.excinfo else "PASS"
                entry[2] = "done"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, status, _ = ACCEPTANCE[number]
        terminalreporter.write_line(f"[{status}] criterion {number}: {title}")
