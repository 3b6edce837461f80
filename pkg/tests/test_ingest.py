import bz2
import gzip
import shutil

import pytest

from wikindex.errors import MalformedXml, UnsupportedCompression
from wikindex.ingest import IngestConfig, is_redirect, open_dump

from conftest import DATA, MINIDUMP


def _page(title, text, ns=0, pid=None, revisions=None):
    pid_xml = f"<id>{pid}</id>" if pid is not None else ""
    revisions = revisions or [text]
    revs = "".join(f"<revision><id>{i}</id><text>{t}</text></revision>"
                   for i, t in enumerate(revisions, start=900))
    return f"<page><title>{title}</title><ns>{ns}</ns>{pid_xml}{revs}</page>"


def _dump(tmp_path, *pages, name="dump.xml"):
    path = tmp_path / name
    path.write_text("<mediawiki>" + "".join(pages) + "</mediawiki>", encoding="utf-8")
    return path


def test_namespace_filter(tmp_path):
    path = _dump(tmp_path, _page("A", "a", pid=1), _page("B", "b", pid=2),
                 _page("Category:Japan", "cat", ns=14, pid=3), _page("C", "c", pid=4))
    pages = list(open_dump(path))
    assert [p.title for p in pages] == ["A", "B", "C"]


def test_namespaces_kept_configurable(tmp_path):
    path = _dump(tmp_path, _page("A", "a", pid=1), _page("Category:Japan", "cat", ns=14, pid=3))
    pages = list(open_dump(path, IngestConfig(namespaces_kept={14})))
    assert [p.title for p in pages] == ["Category:Japan"]


def test_empty_namespaces_rejected():
    with pytest.raises(ValueError):
        IngestConfig(namespaces_kept=set())


@pytest.mark.parametrize("text", ["#REDIRECT [[Tea]]", "#redirect [[Tea]]", "  \n#Redirect[[Tea]]"])
def test_redirects_skipped(tmp_path, text):
    path = _dump(tmp_path, _page("Tea (drink)", text, pid=1), _page("Tea", "tea", pid=2))
    assert [p.title for p in open_dump(path)] == ["Tea"]
    kept = open_dump(path, IngestConfig(skip_redirects=False))
    assert [p.title for p in kept] == ["Tea (drink)", "Tea"]


def test_is_redirect():
    assert is_redirect("#REDIRECT [[X]]")
    assert not is_redirect("See #REDIRECT")


def test_minidump_matches_manifest():
    expected = (DATA / "minidump_titles.txt").read_text(encoding="utf-8").splitlines()
    pages = list(open_dump(MINIDUMP))
    assert len(pages) == 20
    assert [p.title for p in pages] == expected
    assert len({p.page_id for p in pages}) == 20
    assert all("\n" not in p.title for p in pages)


def test_ingestion_is_repeatable():
    assert list(open_dump(MINIDUMP)) == list(open_dump(MINIDUMP))


@pytest.mark.parametrize("suffix, opener", [(".xml.bz2", bz2.open), (".xml.gz", gzip.open)])
def test_compressed_dumps(tmp_path, suffix, opener):
    target = tmp_path / ("mini" + suffix)
    with open(MINIDUMP, "rb") as src, opener(target, "wb") as dst:
        shutil.copyfileobj(src, dst)
    assert list(open_dump(target)) == list(open_dump(MINIDUMP))


def test_unsupported_compression(tmp_path):
    path = tmp_path / "dump.xml.7z"
    path.write_bytes(b"7z")
    with pytest.raises(UnsupportedCompression):
        open_dump(path)


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        open_dump(tmp_path / "nope.xml")


def test_malformed_xml_reports_position(tmp_path):
    path = tmp_path / "bad.xml"
    path.write_text("<mediawiki>\n<page><title>A</title>\n<revision><text>x</revision></page>",
                    encoding="utf-8")
    with pytest.raises(MalformedXml) as info:
        list(open_dump(path))
    assert info.value.line == 3


def test_sequential_ids_when_missing(tmp_path):
    path = _dump(tmp_path, _page("A", "a"), _page("B", "b"), _page("C", "c"))
    assert [p.page_id for p in open_dump(path)] == [1, 2, 3]


def test_latest_revision_wins(tmp_path):
    path = _dump(tmp_path, _page("A", None, pid=5, revisions=["old text", "new text"]))
    (page,) = open_dump(path)
    assert page.wikitext == "new text"
    assert page.page_id == 5


def test_max_pages(tmp_path):
    assert len(list(open_dump(MINIDUMP, IngestConfig(max_pages=4)))) == 4


def test_empty_text_page(tmp_path):
    path = _dump(tmp_path, "<page><title>Empty</title><ns>0</ns><revision><text/></revision></page>")
    (page,) = open_dump(path)
    assert page.wikitext == ""
