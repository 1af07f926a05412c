import pytest

from textproj import corpus as corpus_mod

from pathlib import Path

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def rfc_corpus() -> corpus_mod.Corpus:
    """The 11-document HTTP/IMAP fixture with links and version labels."""
    manifest = corpus_mod.load_manifest(FIXTURES / "rfc_manifest.json")
    report = corpus_mod.ingest_path(
        FIXTURES / "rfc", class_map=manifest.class_map, versions=manifest.versions
    )
    assert not report.failures
    return corpus_mod.Corpus(report.documents, manifest.links)


@pytest.fixture(scope="session")
def http_trio_corpus() -> corpus_mod.Corpus:
    """Just the three HTTP specification versions, for version analyses."""
    manifest = corpus_mod.load_manifest(FIXTURES / "rfc_manifest.json")
    report = corpus_mod.ingest_path(FIXTURES / "rfc", versions=manifest.versions)
    keep = {"rfc1945.txt", "rfc2068.txt", "rfc2616.txt"}
    docs = [d for d in report.documents if d.id in keep]
    return corpus_mod.Corpus(docs)


def corpus_from_tokens(docs: dict[str, list[str]]) -> corpus_mod.Corpus:
    """Corpus whose word tokens are exactly the given lists (index-aligned)."""
    documents = [
        corpus_mod.Document(doc_id, doc_id, corpus_mod.SourceClass.REQUIREMENTS_ANALYSIS, " ".join(tokens))
        for doc_id, tokens in docs.items()
    ]
    return corpus_mod.Corpus(documents)
