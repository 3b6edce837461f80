"""Corpus statistics: rank-frequency lists, Zipf fits, snapshot ratios."""

import csv
import math
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import EmptyIndex, InsufficientData, StoreIoError
from .store import WikiIndex


@dataclass(frozen=True)
class PowerLawFit:
    slope: float
    intercept: float
    k: int
    residual: float

    def predict(self, rank: float) -> float:
        return math.exp(self.slope * math.log(rank) + self.intercept)


@dataclass(frozen=True)
class CorpusStats:
    articles: int = 0
    lexemes: int = 0
    total_words: int = 0
    relations: int = 0


def rank_frequencies(index: WikiIndex, k: int) -> List[int]:
    if k < 1:
        raise ValueError("k must be positive")
    terms = index.terms_by_frequency(k)
    if not terms:
        raise EmptyIndex(f"index {index.path} has no terms")
    return [t.corpus_freq for t in terms]


def fit_power_law(freqs: Sequence[float], k: Optional[int] = None) -> PowerLawFit:
    """Least-squares line through (ln rank, ln freq) for ranks 1..k.

    Solved in closed form on centred sums; for this two-parameter linear
    model that is the same optimum an iterative solver converges to.
    """
    if k is None:
        k = len(freqs)
    k = min(k, len(freqs))
    if k < 2:
        raise InsufficientData(f"need at least 2 ranks to fit, got {k}")
    xs = [math.log(r) for r in range(1, k + 1)]
    ys = []
    for f in freqs[:k]:
        if f <= 0:
            raise ValueError("frequencies must be positive")
        ys.append(math.log(f))
    mean_x = math.fsum(xs) / k
    mean_y = math.fsum(ys) / k
    sxx = math.fsum((x - mean_x) ** 2 for x in xs)
    sxy = math.fsum((x - mean_x) * (y - mean_y) for x, y in zip(xs, ys))
    slope = sxy / sxx
    intercept = mean_y - slope * mean_x
    residual = math.fsum((y - slope * x - intercept) ** 2 for x, y in zip(xs, ys))
    return PowerLawFit(slope, intercept, k, residual)


def corpus_summary(index: WikiIndex) -> CorpusStats:
    return CorpusStats(
        articles=index.page_count(),
        lexemes=index.term_count(),
        total_words=index.total_words(),
        relations=index.relation_count(),
    )


def top_words(index: WikiIndex, n: int) -> List[Tuple[str, int]]:
    return [(t.lemma, t.corpus_freq) for t in index.terms_by_frequency(n)]


@dataclass(frozen=True)
class Comparison:
    field: str
    a: int
    b: int
    ratio: Optional[float]

    @property
    def ratio_text(self) -> str:
        return "n/a" if self.ratio is None else f"{self.ratio:.1f}"

    @property
    def percent_text(self) -> str:
        return "n/a" if self.ratio is None else f"{100 * self.ratio:.0f}"


def compare_snapshots(a: CorpusStats, b: CorpusStats) -> List[Comparison]:
    rows = []
    for f in fields(CorpusStats):
        va, vb = getattr(a, f.name), getattr(b, f.name)
        rows.append(Comparison(f.name, va, vb, va / vb if vb else None))
    return rows


def comparison_tsv(rows: List[Comparison]) -> str:
    lines = ["field\ta\tb\ta/b\ta/b %"]
    lines += [f"{r.field}\t{r.a}\t{r.b}\t{r.ratio_text}\t{r.percent_text}" for r in rows]
    return "\n".join(lines) + "\n"


def comparison_text(rows: List[Comparison]) -> str:
    table = [("field", "a", "b", "a/b", "a/b %")]
    table += [(r.field, str(r.a), str(r.b), r.ratio_text, r.percent_text) for r in rows]
    widths = [max(len(row[i]) for row in table) for i in range(5)]
    out = []
    for row in table:
        cells = [row[0].ljust(widths[0])] + [c.rjust(w) for c, w in zip(row[1:], widths[1:])]
        out.append("  ".join(cells).rstrip())
    return "\n".join(out) + "\n"


def _fmt(value: float) -> str:
    return repr(float(value)) if isinstance(value, float) else str(value)


def write_plot_csv(freqs: Sequence[float], fit_ranges: Sequence[int], out,
                   doc_freqs: Optional[Sequence[int]] = None) -> Dict[int, PowerLawFit]:
    """Write rank, freq and one fitted column per fit range.

    Each fit uses only the first ``n`` ranks (fewer if the list is shorter)
    and is evaluated on every rank. ``doc_freqs`` adds an experimental
    document-frequency column aligned with the frequency ranking.
    """
    fits = {n: fit_power_law(freqs, n) for n in fit_ranges}
    header = ["rank", "freq"] + [f"fit_{n}" for n in fit_ranges]
    if doc_freqs is not None:
        header.append("doc_freq")
    try:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for rank, freq in enumerate(freqs, start=1):
                row = [rank, _fmt(freq)] + [_fmt(fits[n].predict(rank)) for n in fit_ranges]
                if doc_freqs is not None:
                    row.append(doc_freqs[rank - 1])
                writer.writerow(row)
    except OSError as exc:
        raise StoreIoError(f"cannot write {out}: {exc}") from exc
    return fits


def emit_plot_data(index: WikiIndex, k: int, fit_ranges: Sequence[int], out,
                   with_doc_freq: bool = False) -> Dict[int, PowerLawFit]:
    terms = index.terms_by_frequency(k)
    if not terms:
        raise EmptyIndex(f"index {index.path} has no terms")
    freqs = [t.corpus_freq for t in terms]
    doc_freqs = [t.doc_freq for t in terms] if with_doc_freq else None
    return write_plot_csv(freqs, fit_ranges, Path(out), doc_freqs)
