"""Acceptance criteria, one test each.

Every test prints a single ``[PASS]``/``[FAIL]`` line (also collected into the
"acceptance criteria" section of the pytest summary) and then asserts.
Run alone with ``pytest tests/test_acceptance.py -v -s``.
"""

import math
import os
import random
import subprocess
import sys
import threading
import time
from collections import Counter
from contextlib import contextmanager

import psutil
import pytest

from wikindex.ingest import open_dump
from wikindex.lemmatizer import lemmatize, tokenize
from wikindex.pipeline import index_dump
from wikindex.query import doc_term_weights, idf_value, pages_for_lemmas
from wikindex.stats import CorpusStats, compare_snapshots, fit_power_law
from wikindex.wikitext import convert

from conftest import CAP_TFS, DATA, ENGLISH, MINIDUMP, build, record_acceptance
from markup_fuzz import random_markup
from synthetic import write_dump
from test_wikitext import REFERENCE_ROWS, squash

MiB = 1 << 20


class Check:
    def __init__(self):
        self.failures = []
        self.elapsed = 0.0

    def expect(self, ok, what):
        if not ok:
            self.failures.append(what)


@contextmanager
def criterion(number, title, limit=None):
    check = Check()
    start = time.perf_counter()
    try:
        yield check
    except Exception as exc:
        check.failures.append(f"{type(exc).__name__}: {exc}")
    check.elapsed = time.perf_counter() - start
    if limit is not None and check.elapsed >= limit:
        check.failures.append(f"took {check.elapsed:.2f}s, limit {limit}s")
    status = "PASS" if not check.failures else "FAIL"
    detail = "; ".join(check.failures[:3]) or "ok"
    record_acceptance(f"[{status}] AC{number:02d} {title} ({check.elapsed:.2f}s): {detail}")
    assert not check.failures, detail


def test_ac01_golden_parsing():
    with criterion(1, "golden parsing: reference rows and Sakura page", limit=1.0) as c:
        for source, expected in REFERENCE_ROWS:
            got = convert(source)
            c.expect(squash(got) == squash(expected), f"{source[:30]!r} -> {got!r}")
        sakura = convert((DATA / "sakura.wiki").read_text(encoding="utf-8"))
        c.expect(squash(sakura) == squash((DATA / "sakura.txt").read_text(encoding="utf-8")),
                 "Sakura output differs")


FORBIDDEN = ("{{", "[[", "<ref", "<pre", "<!--")


def test_ac02_fuzzed_parser_safety():
    with criterion(2, "fuzzed parser safety on 10,000 strings", limit=30.0) as c:
        rng = random.Random(20080301)
        for _ in range(10_000):
            source = random_markup(rng)
            out = convert(source)
            bad = [m for m in FORBIDDEN if m in out]
            c.expect(not bad, f"{source!r} leaves {bad}")
            c.expect(convert(out) == out, f"not idempotent on {source!r}")
            if len(c.failures) > 3:
                break


def rescan(dump):
    """Brute-force per-page lemma counts straight from the dump text."""
    pages = []
    for page in open_dump(dump):
        tokens = tokenize(convert(page.wikitext))
        counts = Counter(lemmatize(t, ENGLISH) for t in tokens if t.is_word)
        pages.append((page, len(tokens), counts))
    return pages


def test_ac03_index_oracle_equivalence(tmp_path):
    with criterion(3, "mini-dump index equals brute-force rescan", limit=10.0) as c:
        index = index_dump(MINIDUMP, tmp_path / "idx", "en", threads=1, spill_rows=50)
        pages = rescan(MINIDUMP)
        c.expect(len(pages) == 20 and index.page_count() == 20, "page count")
        for page, n_tokens, _ in pages:
            record = index.page_by_id(page.page_id)
            c.expect(record is not None and record.page_title == page.title
                     and record.word_count == n_tokens, f"page {page.title!r}")
        df, cf = Counter(), Counter()
        for _, _, counts in pages:
            df.update(counts.keys())
            cf.update(counts)
        terms = index.terms_by_frequency()
        c.expect(len(terms) == len(df), f"{len(terms)} terms vs {len(df)}")
        for term in terms:
            c.expect((term.doc_freq, term.corpus_freq) == (df[term.lemma], cf[term.lemma]),
                     f"term {term.lemma!r}")


def test_ac04_cap_semantics(cap_index):
    with criterion(4, "cap keeps the 3 largest term_freq of 5 docs") as c:
        term = cap_index.term_lookup("x")
        c.expect(term.doc_freq == 5, f"doc_freq {term.doc_freq}")
        tfs = [p.term_freq for p in cap_index.postings(term.term_id)]
        c.expect(tfs == sorted(CAP_TFS, reverse=True)[:3], f"postings {tfs}")
        c.expect(cap_index.relation_count() == 6, "x and filler each keep 3 rows")


def rel_close(a, b, tol=1e-9):
    return a == b or abs(a - b) <= tol * abs(b)


def test_ac05_tf_idf(three_doc_index, tmp_path):
    with criterion(5, "TF-IDF matches hand values; idf 0 when DF = D") as c:
        expected = {
            "a b a": [("a", 2 * math.log(3 / 1)), ("b", 1 * math.log(3 / 2))],
            "b c": [("b", 1 * math.log(3 / 2)), ("c", 1 * math.log(3 / 2))],
            "c c c": [("c", 3 * math.log(3 / 2))],
        }
        for title, want in expected.items():
            got = doc_term_weights(three_doc_index, title)
            c.expect([t.lemma for t in got] == [l for l, _ in want], f"order for {title!r}")
            for term, (_, weight) in zip(got, want):
                c.expect(rel_close(term.weight, weight), f"{title!r}/{term.lemma}: {term.weight}")
        c.expect(idf_value(3, 3) == 0.0, "idf_value(3, 3)")
        everywhere = build(tmp_path, ["tea x", "tea", "tea y"], name="all")
        c.expect(all(t.idf == 0.0 and t.weight == 0.0
                     for t in doc_term_weights(everywhere, "Doc 2")), "DF = D gives non-zero")


def brute_force_pages(texts, titles, lemmas):
    hits = []
    for text, title in zip(texts, titles):
        counts = Counter(text.split())
        if set(lemmas) <= set(counts):
            hits.append((-sum(counts[l] for l in lemmas), title))
    return [(title, -neg) for neg, title in sorted(hits)]


def test_ac06_conjunctive_query(tmp_path):
    with criterion(6, "conjunctive query equals set-intersection brute force") as c:
        rng = random.Random(6)
        fixtures = [(["green tea green", "tea", "green"], ["Doc 1", "Doc 2", "Doc 3"])]
        for n in range(20):
            texts = [" ".join(rng.choices("pqrst", k=rng.randint(0, 9))) for _ in range(8)]
            titles = [rng.choice(["Alpha", "Beta", "Gamma", "Delta"]) + f" {i % 3}{n}" for i in range(8)]
            titles = [f"{t} {i}" if titles.count(t) > 1 else t for i, t in enumerate(titles)]
            fixtures.append((texts, titles))
        for n, (texts, titles) in enumerate(fixtures):
            index = build(tmp_path, texts, titles, name=f"f{n}")
            vocab = sorted({w for t in texts for w in t.split()}) + ["absent"]
            for _ in range(10):
                lemmas = set(rng.sample(vocab, rng.randint(1, min(3, len(vocab)))))
                got = [(p.page_title, p.sum_tf) for p in pages_for_lemmas(index, lemmas)]
                c.expect(got == brute_force_pages(texts, titles, lemmas), f"fixture {n} {lemmas}")
        green_tea = pages_for_lemmas(build(tmp_path, *fixtures[0], name="gt"), {"green", "tea"})
        c.expect([(p.page_title, p.sum_tf) for p in green_tea] == [("Doc 1", 3)], "green tea")


def test_ac07_zipf_recovery():
    with criterion(7, "power-law parameters recovered to 1e-9", limit=1.0) as c:
        for slope, intercept in [(-1.048, 16.13), (-1.1740404, 14.290272)]:
            freqs = [math.exp(intercept) * r ** slope for r in range(1, 10_001)]
            fit = fit_power_law(freqs, 10_000)
            c.expect(abs(fit.slope - slope) <= 1e-9, f"slope {fit.slope!r} vs {slope}")
            c.expect(abs(fit.intercept - intercept) <= 1e-9,
                     f"intercept {fit.intercept!r} vs {intercept}")


def test_ac08_snapshot_comparison():
    with criterion(8, "snapshot ratios 9.5 / 9.6 / 14.4") as c:
        a = CorpusStats(articles=239_290, lexemes=1_434_000, total_words=32_930_000)
        b = CorpusStats(articles=25_220, lexemes=148_700, total_words=2_283_900)
        rows = {r.field: r.ratio_text for r in compare_snapshots(a, b)}
        want = {"articles": "9.5", "lexemes": "9.6", "total_words": "14.4"}
        for field, text in want.items():
            c.expect(rows[field] == text, f"{field}: {rows[field]} != {text}")


def _cli(*args):
    cmd = [sys.executable, "-m", "wikindex", *map(str, args)]
    return subprocess.run(cmd, capture_output=True, text=True)


def test_ac09_determinism(tmp_path):
    with criterion(9, "builds with 1 and 2 workers export identical bytes") as c:
        exports = []
        for threads, spill in [(1, 200_000), (2, 200_000), (2, 13)]:
            idx, out = tmp_path / f"idx{threads}-{spill}", tmp_path / f"tsv{threads}-{spill}"
            for args in (["index", "--dump", MINIDUMP, "--index", idx, "--lang", "en",
                          "--threads", threads, "--spill-rows", spill],
                         ["export", "--index", idx, "--out", out]):
                proc = _cli(*args)
                c.expect(proc.returncode == 0, f"{args[0]} failed: {proc.stderr.strip()[-200:]}")
            exports.append({name: (out / name).read_bytes()
                            for name in ("term.tsv", "page.tsv", "term_page.tsv")})
        c.expect(all(e == exports[0] for e in exports[1:]), "exports differ")
        c.expect(exports[0]["term_page.tsv"].count(b"\n") > 100, "export suspiciously small")


FIXED_BUDGET = 100 * MiB
DUMP_BYTES = 200 * 1000 * 1000


def _peak_rss(proc, stop, result):
    peak = 0
    try:
        root = psutil.Process(proc.pid)
        while not stop.is_set():
            try:
                tree = [root] + root.children(recursive=True)
                peak = max(peak, sum(p.memory_info().rss for p in tree))
            except psutil.NoSuchProcess:
                pass
            time.sleep(0.02)
    finally:
        result.append(peak)


@pytest.mark.slow
def test_ac10_streaming_bound(tmp_path):
    dump = tmp_path / "synthetic.xml"
    _, largest_page = write_dump(dump, DUMP_BYTES)
    ceiling = FIXED_BUDGET + largest_page
    with criterion(10, f"200 MB dump within {ceiling / MiB:.1f} MiB", limit=300.0) as c:
        cmd = [sys.executable, "-m", "wikindex", "index", "--dump", str(dump),
               "--index", str(tmp_path / "idx"), "--lang", "en", "--threads", "1"]
        proc = subprocess.Popen(cmd, stdout=subprocess.DEVNULL, stderr=subprocess.PIPE, text=True)
        stop, result = threading.Event(), []
        watcher = threading.Thread(target=_peak_rss, args=(proc, stop, result))
        watcher.start()
        _, err = proc.communicate()
        stop.set()
        watcher.join()
        peak = result[0]
        c.expect(proc.returncode == 0, f"index failed: {err.strip()[-200:]}")
        c.expect(peak <= ceiling, f"peak RSS {peak / MiB:.1f} MiB")
        c.expect(os.path.getsize(dump) >= DUMP_BYTES, "dump smaller than 200 MB")
        print(f"peak RSS {peak / MiB:.1f} MiB, ceiling {ceiling / MiB:.1f} MiB")
