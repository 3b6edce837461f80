"""Dump -> plain text -> lemma counts -> index, optionally multi-process.

Workers only run the pure parse/lemmatize step; results come back in
submission order and feed one writer, so the index does not depend on the
number of workers. At most ``2 * threads`` batches are in flight, which keeps
memory bounded no matter how large the dump is.
"""

import hashlib
import logging
import os
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from itertools import islice
from pathlib import Path
from typing import Iterable, Iterator, List, Optional, Tuple

from .ingest import IngestConfig, RawPage, open_dump
from .lemmatizer import LemmatizerSpec, lemma_frequencies
from .store import IndexConfig, IndexWriter, WikiIndex, open_index
from .wikitext import ParserConfig, parse_page

log = logging.getLogger(__name__)

Processed = Tuple[int, str, int, dict]


def file_digest(path, chunk: int = 1 << 20) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(chunk), b""):
            h.update(block)
    return "sha256:" + h.hexdigest()


def process_page(page: RawPage, parser_config: ParserConfig, spec: LemmatizerSpec) -> Processed:
    doc = parse_page(page, parser_config)
    freqs = lemma_frequencies(doc.text, spec)
    return doc.page_id, doc.title, doc.word_count, freqs.entries


def _process_batch(batch: List[RawPage], parser_config, spec) -> List[Processed]:
    return [process_page(p, parser_config, spec) for p in batch]


def _batches(pages: Iterable[RawPage], size: int) -> Iterator[List[RawPage]]:
    it = iter(pages)
    while True:
        batch = list(islice(it, size))
        if not batch:
            return
        yield batch


def process_pages(pages: Iterable[RawPage], parser_config: ParserConfig, spec: LemmatizerSpec,
                  threads: int = 1, batch_size: int = 16) -> Iterator[Processed]:
    if threads <= 1:
        for page in pages:
            yield process_page(page, parser_config, spec)
        return
    with ProcessPoolExecutor(max_workers=threads) as pool:
        pending = deque()
        for batch in _batches(pages, batch_size):
            pending.append(pool.submit(_process_batch, batch, parser_config, spec))
            if len(pending) >= 2 * threads:
                yield from pending.popleft().result()
        while pending:
            yield from pending.popleft().result()


def index_dump(dump: Path, store_path: Path, language: str = "en", *,
               max_pages_per_lexeme: int = 1000, keep_interwiki: bool = False,
               namespaces=(0,), threads: Optional[int] = None, overwrite: bool = False,
               spill_rows: int = 200_000, max_pages: Optional[int] = None) -> WikiIndex:
    """Build an index directory from a MediaWiki dump file."""
    threads = threads or os.cpu_count() or 1
    spec = LemmatizerSpec.for_language(language)
    parser_config = ParserConfig(remove_not_expand_iwiki=not keep_interwiki)
    ingest_config = IngestConfig(namespaces_kept=frozenset(namespaces), max_pages=max_pages)
    config = IndexConfig(store_path=Path(store_path), max_pages_per_lexeme=max_pages_per_lexeme,
                         overwrite=overwrite, spill_rows=spill_rows)
    pages = open_dump(dump, ingest_config)
    extra = {
        "language": language,
        "source_dump": Path(dump).name,
        "source_digest": file_digest(dump),
        "remove_not_expand_iwiki": parser_config.remove_not_expand_iwiki,
        "namespaces": sorted(ingest_config.namespaces_kept),
    }
    with IndexWriter(config, spec, extra) as writer:
        for n, (page_id, title, word_count, counts) in enumerate(
                process_pages(pages, parser_config, spec, threads), start=1):
            writer.add(page_id, title, word_count, counts)
            if n % 1000 == 0:
                log.info("indexed %d pages", n)
    return open_index(store_path)
