"""Three-table inverted index (term, page, term_page) on SQLite.

Build flow: per-document lemma counts are buffered as ``(lemma, page_id,
term_freq)`` rows, spilled to sorted run files whenever the buffer grows
past ``spill_rows``, and k-way merged at finalize. During the merge each
lemma's document frequency and corpus frequency are computed over *all*
postings, while only the ``max_pages_per_lexeme`` postings with the highest
term_freq (ties: lowest page_id) are written to ``term_page``.

The index is assembled in a temporary sibling directory and renamed into
place once complete, so an interrupted build never leaves a readable index.
"""

import csv
import heapq
import itertools
import json
import logging
import os
import shutil
import sqlite3
import tempfile
import threading
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Iterator, List, Optional, Tuple

from .errors import (DuplicatePageId, DuplicateTitle, IndexLocked,
                     StoreAlreadyExists, StoreIoError, UnknownPage)
from .lemmatizer import LemmatizerSpec, lemma_frequencies

log = logging.getLogger(__name__)

FORMAT_VERSION = 1
MANIFEST = "manifest.json"
DB_FILE = "index.sqlite"

_SCHEMA = """
CREATE TABLE term (
    term_id INTEGER PRIMARY KEY,
    lemma TEXT NOT NULL UNIQUE,
    doc_freq INTEGER NOT NULL,
    corpus_freq INTEGER NOT NULL
);
CREATE TABLE page (
    page_id INTEGER PRIMARY KEY,
    page_title TEXT NOT NULL UNIQUE,
    word_count INTEGER NOT NULL
);
CREATE TABLE term_page (
    term_id INTEGER NOT NULL REFERENCES term(term_id),
    page_id INTEGER NOT NULL REFERENCES page(page_id),
    term_freq INTEGER NOT NULL,
    PRIMARY KEY (term_id, page_id)
) WITHOUT ROWID;
"""
_POST_INDEXES = """
CREATE INDEX term_page_by_page ON term_page(page_id);
CREATE INDEX term_by_corpus_freq ON term(corpus_freq DESC, lemma);
"""


@dataclass(frozen=True)
class TermRecord:
    term_id: int
    lemma: str
    doc_freq: int
    corpus_freq: int


@dataclass(frozen=True)
class PageRecord:
    page_id: int
    page_title: str
    word_count: int


@dataclass(frozen=True)
class TermPageRecord:
    term_id: int
    page_id: int
    term_freq: int


@dataclass(frozen=True)
class IndexConfig:
    store_path: Path
    max_pages_per_lexeme: int = 1000
    overwrite: bool = False
    # buffered postings before a sorted run is spilled to disk
    spill_rows: int = 200_000

    def __post_init__(self):
        object.__setattr__(self, "store_path", Path(self.store_path))
        if self.max_pages_per_lexeme < 1:
            raise ValueError("max_pages_per_lexeme must be >= 1")
        if self.spill_rows < 1:
            raise ValueError("spill_rows must be >= 1")


def _lock_path(path: Path) -> Path:
    return path.with_name(path.name + ".lock")


class _RunSpiller:
    """Sorted-run external sort for (lemma, page_id, term_freq) triples."""

    def __init__(self, workdir: Path, limit: int):
        self.workdir = workdir
        self.limit = limit
        self.buffer: List[Tuple[str, int, int]] = []
        self.runs: List[Path] = []

    def extend(self, page_id: int, counts: dict) -> None:
        self.buffer.extend((lemma, page_id, tf) for lemma, tf in counts.items())
        if len(self.buffer) >= self.limit:
            self._spill()

    def _spill(self) -> None:
        self.buffer.sort()
        run = self.workdir / f"run-{len(self.runs):05d}.tsv"
        with open(run, "w", encoding="utf-8", newline="\n") as fh:
            fh.writelines(f"{l}\t{p}\t{t}\n" for l, p, t in self.buffer)
        self.runs.append(run)
        self.buffer = []

    @staticmethod
    def _read(run: Path) -> Iterator[Tuple[str, int, int]]:
        with open(run, encoding="utf-8", newline="\n") as fh:
            for line in fh:
                lemma, page_id, tf = line.rstrip("\n").split("\t")
                yield lemma, int(page_id), int(tf)

    def merged(self) -> Iterator[Tuple[str, int, int]]:
        if not self.runs:
            self.buffer.sort()
            buffer, self.buffer = self.buffer, []
            return iter(buffer)
        if self.buffer:
            self._spill()
        log.info("merging %d sorted runs", len(self.runs))
        return heapq.merge(*(self._read(r) for r in self.runs))


class IndexWriter:
    """Single-writer index builder; use as a context manager.

    ``add`` takes already-computed lemma counts so callers can lemmatize in
    parallel; :func:`build_index` is the convenience wrapper over PlainDocs.
    """

    def __init__(self, config: IndexConfig, spec: LemmatizerSpec, manifest_extra: Optional[dict] = None):
        self.config = config
        self.spec = spec
        self.manifest_extra = dict(manifest_extra or {})
        self.path = config.store_path
        self._lock = None
        self._tmpdir: Optional[Path] = None
        self._db: Optional[sqlite3.Connection] = None
        self._spiller: Optional[_RunSpiller] = None
        self.pages = 0

    def __enter__(self):
        self.open()
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc_type is None:
            self.commit()
        else:
            self.abort()
        return False

    def open(self) -> None:
        path = self.path
        if path.exists() and not self.config.overwrite:
            raise StoreAlreadyExists(f"index already exists: {path} (use overwrite)")
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            fd = os.open(_lock_path(path), os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise IndexLocked(f"another build holds {_lock_path(path)}") from None
        except OSError as exc:
            raise StoreIoError(f"cannot create index at {path}: {exc}") from exc
        os.write(fd, str(os.getpid()).encode())
        os.close(fd)
        self._lock = _lock_path(path)
        try:
            self._tmpdir = Path(tempfile.mkdtemp(prefix=f".{path.name}.build-", dir=path.parent))
            (self._tmpdir / "runs").mkdir()
            self._db = sqlite3.connect(self._tmpdir / DB_FILE)
            self._db.executescript("PRAGMA journal_mode=OFF; PRAGMA synchronous=OFF;" + _SCHEMA)
        except (OSError, sqlite3.Error) as exc:
            self.abort()
            raise StoreIoError(f"cannot create index at {path}: {exc}") from exc
        self._spiller = _RunSpiller(self._tmpdir / "runs", self.config.spill_rows)

    def add(self, page_id: int, title: str, word_count: int, counts: dict) -> None:
        try:
            self._db.execute("INSERT INTO page VALUES (?, ?, ?)", (page_id, title, word_count))
        except sqlite3.IntegrityError:
            hit = self._db.execute("SELECT 1 FROM page WHERE page_title = ?", (title,)).fetchone()
            if hit:
                raise DuplicateTitle(f"duplicate page title: {title!r}") from None
            raise DuplicatePageId(f"duplicate page id {page_id} ({title!r})") from None
        try:
            self._spiller.extend(page_id, counts)
        except OSError as exc:
            raise StoreIoError(f"cannot spill postings: {exc}") from exc
        self.pages += 1

    def _write_terms(self) -> None:
        cap = self.config.max_pages_per_lexeme
        db = self._db
        term_rows = []
        posting_rows = []
        for term_id, (lemma, group) in enumerate(
                itertools.groupby(self._spiller.merged(), key=lambda r: r[0]), start=1):
            doc_freq = 0
            corpus_freq = 0

            def counted(rows):
                nonlocal doc_freq, corpus_freq
                for _, page_id, tf in rows:
                    doc_freq += 1
                    corpus_freq += tf
                    yield -tf, page_id

            kept = heapq.nsmallest(cap, counted(group))
            term_rows.append((term_id, lemma, doc_freq, corpus_freq))
            posting_rows.extend((term_id, page_id, -neg_tf) for neg_tf, page_id in kept)
            if len(posting_rows) >= 50_000:
                db.executemany("INSERT INTO term VALUES (?, ?, ?, ?)", term_rows)
                db.executemany("INSERT INTO term_page VALUES (?, ?, ?)", posting_rows)
                term_rows, posting_rows = [], []
        db.executemany("INSERT INTO term VALUES (?, ?, ?, ?)", term_rows)
        db.executemany("INSERT INTO term_page VALUES (?, ?, ?)", posting_rows)

    def commit(self) -> None:
        try:
            self._write_terms()
            self._db.executescript(_POST_INDEXES)
            self._db.commit()
            self._db.close()
            self._db = None
            shutil.rmtree(self._tmpdir / "runs")
            manifest = {
                "format_version": FORMAT_VERSION,
                "lemmatizer": asdict(self.spec),
                "max_pages_per_lexeme": self.config.max_pages_per_lexeme,
                **self.manifest_extra,
            }
            with open(self._tmpdir / MANIFEST, "w", encoding="utf-8") as fh:
                json.dump(manifest, fh, indent=2, sort_keys=True)
                fh.write("\n")
            self._swap_into_place()
        except (OSError, sqlite3.Error) as exc:
            self.abort()
            raise StoreIoError(f"failed to finalize index {self.path}: {exc}") from exc
        except BaseException:
            self.abort()
            raise
        self._release_lock()
        log.info("index written to %s (%d pages)", self.path, self.pages)

    def _swap_into_place(self) -> None:
        path = self.path
        old = None
        if path.exists():
            old = path.with_name(f".{path.name}.old-{os.getpid()}")
            os.rename(path, old)
        os.rename(self._tmpdir, path)
        self._tmpdir = None
        if old is not None:
            shutil.rmtree(old, ignore_errors=True)

    def abort(self) -> None:
        if self._db is not None:
            self._db.close()
            self._db = None
        if self._tmpdir is not None:
            shutil.rmtree(self._tmpdir, ignore_errors=True)
            self._tmpdir = None
        self._release_lock()

    def _release_lock(self) -> None:
        if self._lock is not None:
            try:
                os.unlink(self._lock)
            except FileNotFoundError:
                pass
            self._lock = None


def build_index(pages: Iterable, spec: LemmatizerSpec, config: IndexConfig,
                manifest_extra: Optional[dict] = None) -> "WikiIndex":
    """Index a stream of PlainDocs and return the opened index."""
    with IndexWriter(config, spec, manifest_extra) as writer:
        for doc in pages:
            freqs = lemma_frequencies(doc.text, spec)
            writer.add(doc.page_id, doc.title, doc.word_count, freqs.entries)
    return open_index(config.store_path)


def open_index(path) -> "WikiIndex":
    return WikiIndex(path)


class WikiIndex:
    """Read-only handle; safe to share between threads."""

    def __init__(self, path):
        self.path = Path(path)
        if _lock_path(self.path).exists():
            raise IndexLocked(f"index {self.path} is being built")
        try:
            with open(self.path / MANIFEST, encoding="utf-8") as fh:
                self.manifest = json.load(fh)
        except FileNotFoundError:
            raise StoreIoError(f"no index at {self.path}") from None
        except (OSError, ValueError) as exc:
            raise StoreIoError(f"unreadable manifest in {self.path}: {exc}") from exc
        if self.manifest.get("format_version") != FORMAT_VERSION:
            raise StoreIoError(f"unsupported index format {self.manifest.get('format_version')!r}")
        self._db_path = self.path / DB_FILE
        if not self._db_path.exists():
            raise StoreIoError(f"missing {DB_FILE} in {self.path}")
        self._local = threading.local()

    @property
    def lemmatizer_spec(self) -> LemmatizerSpec:
        return LemmatizerSpec(**self.manifest["lemmatizer"])

    @property
    def max_pages_per_lexeme(self) -> int:
        return self.manifest["max_pages_per_lexeme"]

    def _conn(self) -> sqlite3.Connection:
        conn = getattr(self._local, "conn", None)
        if conn is None:
            uri = self._db_path.resolve().as_uri() + "?mode=ro"
            conn = sqlite3.connect(uri, uri=True)
            self._local.conn = conn
        return conn

    def _query(self, sql: str, params=()) -> list:
        try:
            return self._conn().execute(sql, params).fetchall()
        except sqlite3.Error as exc:
            raise StoreIoError(f"index query failed: {exc}") from exc

    def close(self) -> None:
        conn = getattr(self._local, "conn", None)
        if conn is not None:
            conn.close()
            self._local.conn = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    # -- term table ---------------------------------------------------------

    def term_lookup(self, lemma: str) -> Optional[TermRecord]:
        rows = self._query("SELECT * FROM term WHERE lemma = ?", (lemma,))
        return TermRecord(*rows[0]) if rows else None

    def terms_by_frequency(self, limit: Optional[int] = None) -> List[TermRecord]:
        sql = "SELECT * FROM term ORDER BY corpus_freq DESC, lemma ASC"
        if limit is not None:
            sql += f" LIMIT {int(limit)}"
        return [TermRecord(*r) for r in self._query(sql)]

    def term_count(self) -> int:
        return self._query("SELECT COUNT(*) FROM term")[0][0]

    def total_words(self) -> int:
        return self._query("SELECT COALESCE(SUM(corpus_freq), 0) FROM term")[0][0]

    # -- page table ---------------------------------------------------------

    def page_by_title(self, title: str) -> Optional[PageRecord]:
        rows = self._query("SELECT * FROM page WHERE page_title = ?", (title,))
        return PageRecord(*rows[0]) if rows else None

    def page_by_id(self, page_id: int) -> Optional[PageRecord]:
        rows = self._query("SELECT * FROM page WHERE page_id = ?", (page_id,))
        return PageRecord(*rows[0]) if rows else None

    def page_count(self) -> int:
        return self._query("SELECT COUNT(*) FROM page")[0][0]

    # -- term_page table ----------------------------------------------------

    def postings(self, term_id: int) -> List[TermPageRecord]:
        rows = self._query(
            "SELECT term_id, page_id, term_freq FROM term_page WHERE term_id = ? "
            "ORDER BY term_freq DESC, page_id ASC", (term_id,))
        return [TermPageRecord(*r) for r in rows]

    def doc_terms(self, page_id: int) -> List[Tuple[str, int]]:
        if self.page_by_id(page_id) is None:
            raise UnknownPage(f"no page with id {page_id}")
        rows = self._query(
            "SELECT t.lemma, tp.term_freq FROM term_page tp JOIN term t USING (term_id) "
            "WHERE tp.page_id = ? ORDER BY t.lemma", (page_id,))
        return [(lemma, tf) for lemma, tf in rows]

    def page_postings(self, page_id: int) -> List[Tuple[str, int, int]]:
        """(lemma, term_freq, doc_freq) for every stored posting of a page."""
        return self._query(
            "SELECT t.lemma, tp.term_freq, t.doc_freq FROM term_page tp JOIN term t USING (term_id) "
            "WHERE tp.page_id = ?", (page_id,))

    def relation_count(self) -> int:
        return self._query("SELECT COUNT(*) FROM term_page")[0][0]

    # -- export -------------------------------------------------------------

    def export_tsv(self, out_dir) -> List[Path]:
        """Write term.tsv, page.tsv and term_page.tsv sorted by primary key."""
        out_dir = Path(out_dir)
        tables = [
            ("term", ("term_id", "lemma", "doc_freq", "corpus_freq"), "term_id"),
            ("page", ("page_id", "page_title", "word_count"), "page_id"),
            ("term_page", ("term_id", "page_id", "term_freq"), "term_id, page_id"),
        ]
        written = []
        try:
            out_dir.mkdir(parents=True, exist_ok=True)
            for name, columns, order in tables:
                target = out_dir / f"{name}.tsv"
                with open(target, "w", encoding="utf-8", newline="") as fh:
                    writer = csv.writer(fh, delimiter="\t", lineterminator="\n",
                                        quoting=csv.QUOTE_NONE, escapechar="\\")
                    writer.writerow(columns)
                    cursor = self._conn().execute(
                        f"SELECT {', '.join(columns)} FROM {name} ORDER BY {order}")
                    for row in cursor:
                        writer.writerow(row)
                written.append(target)
        except (OSError, sqlite3.Error) as exc:
            raise StoreIoError(f"export to {out_dir} failed: {exc}") from exc
        return written
