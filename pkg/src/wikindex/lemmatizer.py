"""Tokenization and lemma frequency lists.

Two lemmatizers are built in: ``normalize-only`` (NFKC + lowercase) and
``english-suffix``, a small rule-based stripper for English inflections.
Anything else can be plugged in with :func:`register_lemmatizer`.
"""

import re
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, List

NORMALIZE_ONLY = "normalize-only"
ENGLISH_SUFFIX = "english-suffix"
EXTERNAL = "external"
KINDS = (NORMALIZE_ONLY, ENGLISH_SUFFIX, EXTERNAL)
ENGLISH_CODES = ("en", "simple")

# A run of letters/digits (plus combining marks), possibly joined by
# apostrophes or hyphens that have a letter on both sides.
_CHAR = r"(?:[^\W_]|[\u0300-\u036f])"
_TOKEN_RE = re.compile(
    r"[^\W_]" + _CHAR + r"*"
    r"(?:(?<=[^\W\d_])['\u2019-](?=[^\W\d_])" + _CHAR + r"+)*"
)

_external: Dict[str, Callable[[str], str]] = {}


@dataclass(frozen=True)
class Token:
    surface: str
    offset: int
    is_word: bool = True


@dataclass
class LemmaFreqList:
    entries: Dict[str, int] = field(default_factory=dict)
    total_tokens: int = 0


@dataclass(frozen=True)
class LemmatizerSpec:
    kind: str = NORMALIZE_ONLY
    language: str = "und"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown lemmatizer kind {self.kind!r}")
        if self.kind == ENGLISH_SUFFIX and self.language not in ENGLISH_CODES:
            raise ValueError("english-suffix lemmatizer requires language 'en' or 'simple'")

    @classmethod
    def for_language(cls, language: str) -> "LemmatizerSpec":
        if language in ENGLISH_CODES:
            return cls(ENGLISH_SUFFIX, language)
        return cls(NORMALIZE_ONLY, language)


def register_lemmatizer(language: str, func: Callable[[str], str]) -> None:
    """Register the lemma function used by ``LemmatizerSpec("external", language)``.

    The function receives the raw token surface and must return a nonempty
    string; it has to be safe to call concurrently.
    """
    _external[language] = func


def unregister_lemmatizer(language: str) -> None:
    _external.pop(language, None)


def _has_letter(s: str) -> bool:
    return any(c.isalpha() for c in s)


def tokenize(text: str) -> List[Token]:
    """Split *text* into tokens; tokens without a letter get ``is_word=False``."""
    return [Token(m.group(), m.start(), _has_letter(m.group()))
            for m in _TOKEN_RE.finditer(text)]


def count_tokens(text: str) -> int:
    return sum(1 for _ in _TOKEN_RE.finditer(text))


@lru_cache(maxsize=1 << 18)
def normalize(surface: str) -> str:
    folded = unicodedata.normalize("NFKC", surface).lower()
    folded = "".join(folded.split())
    return folded or surface.lower()


_VOWELS = frozenset("aeiou")


def _consonant(word: str, i: int) -> bool:
    c = word[i]
    if c in _VOWELS:
        return False
    if c == "y":
        return i == 0 or not _consonant(word, i - 1)
    return True


def _measure(stem: str) -> int:
    """Number of vowel-consonant sequences, as in Porter's stemmer."""
    m = 0
    prev_vowel = False
    for i in range(len(stem)):
        cons = _consonant(stem, i)
        if cons and prev_vowel:
            m += 1
        prev_vowel = not cons
    return m


def _has_vowel(stem: str) -> bool:
    return any(not _consonant(stem, i) for i in range(len(stem)))


def _ends_cvc(stem: str) -> bool:
    n = len(stem)
    if n < 3 or stem[-1] in "wxy":
        return False
    return _consonant(stem, n - 3) and not _consonant(stem, n - 2) and _consonant(stem, n - 1)


def _restore(stem: str) -> str:
    if stem.endswith(("at", "bl", "iz")):
        return stem + "e"
    if len(stem) >= 2 and stem[-1] == stem[-2] and _consonant(stem, len(stem) - 1) \
            and stem[-1] not in "lsz":
        return stem[:-1]
    if _measure(stem) == 1 and _ends_cvc(stem):
        return stem + "e"
    return stem


_MIN_STEM = 3


def _strip_once(word: str) -> str:
    if word.endswith(("'s", "’s")) and len(word) > 2:
        return word[:-2]
    # the restored "y" counts toward the stem: dries -> dry
    if word.endswith("ies") and len(word) - 2 >= _MIN_STEM:
        return word[:-3] + "y"
    if word.endswith(("sses", "xes", "ches", "shes", "zzes")) and len(word) - 2 >= _MIN_STEM:
        return word[:-2]
    if word.endswith("s") and not word.endswith(("ss", "us", "is")) \
            and len(word) - 1 >= _MIN_STEM:
        return word[:-1]
    if word.endswith("ied") and len(word) - 2 >= _MIN_STEM:
        return word[:-3] + "y"
    if word.endswith("eed"):
        return word
    for suffix in ("ing", "ed"):
        if word.endswith(suffix):
            stem = word[:-len(suffix)]
            if len(stem) >= _MIN_STEM and _has_vowel(stem):
                return _restore(stem)
            return word
    return word


@lru_cache(maxsize=1 << 18)
def english_lemma(surface: str) -> str:
    """Strip English inflections until no rule applies any more."""
    word = normalize(surface)
    while True:
        stripped = _strip_once(word)
        if stripped == word:
            return word
        word = stripped


def lemmatize(token, spec: LemmatizerSpec) -> str:
    surface = token.surface if isinstance(token, Token) else token
    if spec.kind == NORMALIZE_ONLY:
        return normalize(surface)
    if spec.kind == ENGLISH_SUFFIX:
        return english_lemma(surface)
    try:
        func = _external[spec.language]
    except KeyError:
        raise LookupError(f"no external lemmatizer registered for {spec.language!r}") from None
    lemma = func(surface)
    if not isinstance(lemma, str) or not lemma or any(ch.isspace() for ch in lemma):
        raise ValueError(f"external lemmatizer returned {lemma!r} for {surface!r}")
    return lemma


def lemma_frequencies(text: str, spec: LemmatizerSpec) -> LemmaFreqList:
    if spec.kind == NORMALIZE_ONLY:
        lemma = normalize
    elif spec.kind == ENGLISH_SUFFIX:
        lemma = english_lemma
    else:
        def lemma(s):
            return lemmatize(s, spec)
    counts = Counter()
    total = 0
    for m in _TOKEN_RE.finditer(text):
        surface = m.group()
        total += 1
        if _has_letter(surface):
            counts[lemma(surface)] += 1
    return LemmaFreqList(dict(counts), total)
