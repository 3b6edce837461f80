"""Streaming reader for MediaWiki XML export dumps.

Pages are pulled out one at a time with ``iterparse`` and the element tree
is cleared after every page, so memory stays proportional to the largest
page rather than to the dump.
"""

import bz2
import gzip
import os
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from typing import Iterator, Optional

from .errors import MalformedXml, UnsupportedCompression

_REDIRECT_RE = re.compile(r"\s*#redirect", re.IGNORECASE)
_UNSUPPORTED_SUFFIXES = (".7z", ".xz", ".zst", ".lzma", ".zip", ".lz4")


@dataclass(frozen=True)
class RawPage:
    page_id: int
    title: str
    namespace: int
    wikitext: str


@dataclass(frozen=True)
class IngestConfig:
    namespaces_kept: frozenset = field(default_factory=lambda: frozenset({0}))
    skip_redirects: bool = True
    max_pages: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "namespaces_kept", frozenset(self.namespaces_kept))
        if not self.namespaces_kept:
            raise ValueError("namespaces_kept must not be empty")
        if self.max_pages is not None and self.max_pages < 1:
            raise ValueError("max_pages must be positive")


def is_redirect(wikitext: str) -> bool:
    return _REDIRECT_RE.match(wikitext) is not None


def _open_binary(path):
    lower = os.fspath(path).lower()
    if lower.endswith(".bz2"):
        return bz2.open(path, "rb")
    if lower.endswith(".gz"):
        return gzip.open(path, "rb")
    if lower.endswith(_UNSUPPORTED_SUFFIXES):
        raise UnsupportedCompression(f"cannot read {path}: only .xml, .xml.bz2 and .xml.gz are supported")
    return open(path, "rb")


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def open_dump(path, config: Optional[IngestConfig] = None) -> Iterator[RawPage]:
    """Yield the indexable pages of a dump in document order.

    Raises FileNotFoundError eagerly; XML errors surface while iterating.
    """
    config = config or IngestConfig()
    if not os.path.exists(path):
        raise FileNotFoundError(f"dump not found: {path}")
    stream = _open_binary(path)
    return _iter_pages(stream, config, path)


def _iter_pages(stream, config, path):
    next_seq = 1
    emitted = 0
    depth = 0
    page_depth = None
    title = ns = page_id = text = None
    in_revision = False
    root = None
    try:
        with stream:
            for event, elem in ET.iterparse(stream, events=("start", "end")):
                name = _local(elem.tag)
                if event == "start":
                    depth += 1
                    if root is None:
                        root = elem
                    if name == "page":
                        page_depth = depth
                        title = ns = page_id = text = None
                    elif name == "revision" and page_depth is not None:
                        in_revision = True
                    continue

                depth -= 1
                if page_depth is None:
                    continue
                if name == "title" and depth == page_depth:
                    title = (elem.text or "").replace("\n", " ").strip()
                elif name == "ns" and depth == page_depth:
                    ns = int((elem.text or "0").strip() or 0)
                elif name == "id" and depth == page_depth:
                    page_id = int(elem.text.strip())
                elif name == "text" and in_revision:
                    # later revisions overwrite earlier ones
                    text = elem.text or ""
                elif name == "revision":
                    in_revision = False
                    elem.clear()
                elif name == "page":
                    page_depth = None
                    if page_id is None:
                        page_id = next_seq
                    next_seq = max(next_seq, page_id) + 1
                    elem.clear()
                    root.clear()
                    page = _accept(title, ns, page_id, text, config)
                    if page is not None:
                        yield page
                        emitted += 1
                        if config.max_pages is not None and emitted >= config.max_pages:
                            return
    except ET.ParseError as exc:
        line, column = getattr(exc, "position", (None, None))
        raise MalformedXml(f"malformed XML in {path}: {exc.msg}", line, column) from exc
    except ValueError as exc:
        raise MalformedXml(f"malformed page field in {path}: {exc}") from exc


def _accept(title, ns, page_id, text, config):
    if not title:
        return None
    ns = 0 if ns is None else ns
    if ns not in config.namespaces_kept:
        return None
    text = text or ""
    if config.skip_redirects and is_redirect(text):
        return None
    return RawPage(page_id=page_id, title=title, namespace=ns, wikitext=text)
