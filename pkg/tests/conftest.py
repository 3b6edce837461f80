from pathlib import Path

import pytest

from wikindex.lemmatizer import LemmatizerSpec
from wikindex.store import IndexConfig, build_index
from wikindex.wikitext import PlainDoc
from wikindex.lemmatizer import count_tokens

DATA = Path(__file__).parent / "data"
MINIDUMP = DATA / "minidump.xml"

NORMALIZE = LemmatizerSpec("normalize-only", "xx")
ENGLISH = LemmatizerSpec("english-suffix", "en")

_acceptance_lines = []


def record_acceptance(line: str) -> None:
    print(line)
    _acceptance_lines.append(line)


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_acceptance_lines):
            terminalreporter.write_line(line)


def make_docs(texts, titles=None, first_id=1):
    titles = titles or [f"Doc {i}" for i in range(first_id, first_id + len(texts))]
    return [PlainDoc(page_id=first_id + i, title=t, text=text, word_count=count_tokens(text))
            for i, (t, text) in enumerate(zip(titles, texts))]


def build(tmp_path, texts, titles=None, spec=NORMALIZE, name="idx", **config):
    cfg = IndexConfig(store_path=tmp_path / name, **config)
    return build_index(make_docs(texts, titles), spec, cfg)


@pytest.fixture
def three_doc_index(tmp_path):
    index = build(tmp_path, ["a b a", "b c", "c c c"], ["a b a", "b c", "c c c"])
    yield index
    index.close()


CAP_TFS = [1, 4, 2, 5, 3]


@pytest.fixture
def cap_index(tmp_path):
    """Lemma 'x' in five documents with term_freq 1, 4, 2, 5, 3; cap 3."""
    texts = [" ".join(["x"] * tf + ["filler"]) for tf in CAP_TFS]
    index = build(tmp_path, texts, max_pages_per_lexeme=3)
    yield index
    index.close()


@pytest.fixture
def green_tea_index(tmp_path):
    index = build(tmp_path, ["green tea green", "tea", "green"], ["Doc 1", "Doc 2", "Doc 3"])
    yield index
    index.close()
