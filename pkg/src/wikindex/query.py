"""TF-IDF queries over an opened index.

Weights follow ``w = tf * ln(D / DF)`` where D is the number of indexed
pages and DF the lemma's (uncapped) document frequency.
"""

import json
import math
from dataclasses import asdict, dataclass
from typing import Iterable, List

from .errors import UnknownLemma, UnknownPage
from .store import WikiIndex


@dataclass(frozen=True)
class WeightedTerm:
    lemma: str
    tf: float
    idf: float
    weight: float


@dataclass(frozen=True)
class RankedPage:
    page_title: str
    sum_tf: int
    n_words: int


def idf_value(total_docs: int, doc_freq: int) -> float:
    return math.log(total_docs / doc_freq)


def idf(index: WikiIndex, lemma: str) -> float:
    term = index.term_lookup(lemma)
    if term is None:
        raise UnknownLemma(f"lemma not in index: {lemma!r}")
    return idf_value(index.page_count(), term.doc_freq)


def _resolve_page(index: WikiIndex, title: str):
    page = index.page_by_title(title)
    if page is None and "_" in title:
        # MediaWiki database titles use underscores for spaces
        page = index.page_by_title(title.replace("_", " "))
    if page is None:
        raise UnknownPage(f"page not in index: {title!r}")
    return page


def doc_term_weights(index: WikiIndex, page_title: str, top_k: int = 10,
                     normalize_tf: bool = False) -> List[WeightedTerm]:
    """Terms of one page ordered by TF-IDF weight, then lemma."""
    if top_k < 1:
        raise ValueError("top_k must be positive")
    page = _resolve_page(index, page_title)
    if normalize_tf and page.word_count == 0:
        return []
    total_docs = index.page_count()
    result = []
    for lemma, term_freq, doc_freq in index.page_postings(page.page_id):
        tf = term_freq / page.word_count if normalize_tf else float(term_freq)
        w_idf = idf_value(total_docs, doc_freq)
        result.append(WeightedTerm(lemma, tf, w_idf, tf * w_idf))
    result.sort(key=lambda t: (-t.weight, t.lemma))
    return result[:top_k]


def pages_for_lemmas(index: WikiIndex, lemmas: Iterable[str], top_k: int = 100) -> List[RankedPage]:
    """Pages holding a stored posting for every lemma, ranked by summed tf.

    Postings dropped by the per-lexeme cap are invisible here.
    """
    lemmas = sorted(set(lemmas))
    if not lemmas:
        raise ValueError("at least one lemma is required")
    if top_k < 1:
        raise ValueError("top_k must be positive")
    sums = None
    for lemma in lemmas:
        term = index.term_lookup(lemma)
        if term is None:
            return []
        tfs = {p.page_id: p.term_freq for p in index.postings(term.term_id)}
        if sums is None:
            sums = tfs
        else:
            sums = {pid: sums[pid] + tf for pid, tf in tfs.items() if pid in sums}
        if not sums:
            return []
    ranked = []
    for page_id, sum_tf in sums.items():
        page = index.page_by_id(page_id)
        ranked.append(RankedPage(page.page_title, sum_tf, page.word_count))
    ranked.sort(key=lambda r: (-r.sum_tf, r.page_title))
    return ranked[:top_k]


TSV_HEADER = ("rank", "ΣTF", "page_title", "n_words")


def ranked_pages_tsv(pages: List[RankedPage]) -> str:
    lines = ["\t".join(TSV_HEADER)]
    for n, page in enumerate(pages, start=1):
        lines.append(f"{n}\t{page.sum_tf}\t{page.page_title}\t{page.n_words}")
    return "\n".join(lines) + "\n"


def ranked_pages_jsonl(pages: List[RankedPage]) -> str:
    return "".join(json.dumps({"rank": n, **asdict(p)}, ensure_ascii=False) + "\n"
                   for n, p in enumerate(pages, start=1))


def weighted_terms_tsv(terms: List[WeightedTerm]) -> str:
    lines = ["rank\tlemma\ttf\tidf\tweight"]
    for n, t in enumerate(terms, start=1):
        lines.append(f"{n}\t{t.lemma}\t{t.tf:.6g}\t{t.idf:.6f}\t{t.weight:.6f}")
    return "\n".join(lines) + "\n"


def weighted_terms_jsonl(terms: List[WeightedTerm]) -> str:
    return "".join(json.dumps({"rank": n, **asdict(t)}, ensure_ascii=False) + "\n"
                   for n, t in enumerate(terms, start=1))
