"""Wiki dump indexing toolkit.

Converts MediaWiki wikitext to plain text, builds a lemma inverted index
(term, page, term_page tables), answers TF-IDF queries and computes corpus
statistics such as Zipf power-law fits.
"""

from .errors import WikindexError
from .ingest import IngestConfig, RawPage, open_dump
from .lemmatizer import (LemmaFreqList, LemmatizerSpec, Token, lemma_frequencies,
                         lemmatize, register_lemmatizer, tokenize, unregister_lemmatizer)
from .pipeline import index_dump
from .query import RankedPage, WeightedTerm, doc_term_weights, idf, pages_for_lemmas
from .stats import (CorpusStats, PowerLawFit, compare_snapshots, corpus_summary,
                    emit_plot_data, fit_power_law, rank_frequencies, top_words)
from .store import (IndexConfig, PageRecord, TermPageRecord, TermRecord, WikiIndex,
                    build_index, open_index)
from .wikitext import ParserConfig, PlainDoc, convert, parse_page

__version__ = "0.1.0"
