"""Wikitext to plain natural-language text.

The conversion is a fixed sequence of regex-driven rewrites:

    removal         comments, <pre>, <source>/<code>
    transformation  <ref> bodies moved to the end, templates, tables,
                    combining acute accents, bold, italic, image captions,
                    internal links, external links, XML-unsafe characters

followed by a scrub that deletes markup fragments left over from unbalanced
input and a whitespace tidy-up. Every step only deletes characters or swaps
them for a space or a newline, which is what makes ``convert`` a projection:
running it on its own output changes nothing.
"""

import re
from dataclasses import dataclass

from .ingest import RawPage
from .lemmatizer import count_tokens


@dataclass(frozen=True)
class ParserConfig:
    remove_not_expand_iwiki: bool = True
    template_passes: int = 2

    def __post_init__(self):
        if self.template_passes < 1:
            raise ValueError("template_passes must be >= 1")


@dataclass(frozen=True)
class PlainDoc:
    page_id: int
    title: str
    text: str
    word_count: int


DEFAULT_CONFIG = ParserConfig()

_COMMENT_RE = re.compile(r"<!--.*?(?:-->|\Z)", re.S)
_PRE_RE = re.compile(r"<pre\b[^>]*>.*?</pre\s*>", re.S | re.I)
_SOURCE_RE = re.compile(r"<(source|code)\b[^>]*>.*?</\1\s*>", re.S | re.I)

_REF_EMPTY_RE = re.compile(r"<ref\b[^>]*/>", re.I)
_REF_RE = re.compile(r"<ref\b[^>]*>(.*?)</ref\s*>", re.S | re.I)

_TEMPLATE_RE = re.compile(r"\{\{(?:(?!\{\{|\}\}).)*\}\}", re.S)
_TEMPLATE_LEFTOVER_RE = re.compile(r"\{\{.*?(?:\}\}|\Z)", re.S)
_TABLE_RE = re.compile(r"\{\|(?:(?!\{\||\|\}).)*\|\}", re.S)
_TABLE_LEFTOVER_RE = re.compile(r"\{\|.*?(?:\|\}|\Z)", re.S)
_TABLE_PASSES = 2

_BOLD_RE = re.compile(r"'''([^\n]+?)'''")
_ITALIC_RE = re.compile(r"''([^\n]+?)''")
_APOSTROPHE_RUN_RE = re.compile(r"'{2,}")

_IMAGE_OPEN_RE = re.compile(
    r"\[\[\s*(?:image|file|изображение|файл)\s*:", re.I)
_IMAGE_PARAM_RE = re.compile(
    r"(?:thumb|thumbnail|frame|framed|frameless|border|left|right|center|centre|"
    r"none|upright|baseline|middle|sub|super|top|text-top|bottom|text-bottom|"
    r"\d*(?:x\d+)?\s*px|(?:upright|alt|link|page|class|lang|thumb|thumbnail)\s*=.*)",
    re.I | re.S)

_LINK_RE = re.compile(r"\[\[([^\[\]]*)\]\]")
_CATEGORY_RE = re.compile(r"\s*(?:category|категория)\s*:", re.I)
_INTERWIKI_RE = re.compile(r"\s*(?:[a-zA-Z]{2,3}(?:-[a-zA-Z]{2,8})?|w)\s*:\s*")

_EXTLINK_RE = re.compile(r"\[([^\s\[\]]+)(?:[ \t]+([^\[\]\n]*))?\]")
_URL_RE = re.compile(r"(?:[a-zA-Z][a-zA-Z0-9+.\-]*:)?(?://)?\S*[^\s.]\.\S*[^\s.]|"
                     r"[a-zA-Z][a-zA-Z0-9+.\-]*://\S+|//\S+")

_ENTITY_RE = re.compile(r"&(?:lt|gt|amp|quot|#0*39|nbsp|ndash|mdash);", re.I)
_BR_RE = re.compile(r"<br\s*/?\s*>", re.I)
_UNSAFE_RE = re.compile(r'[<>&"]')

_DEBRIS_RE = re.compile(r"\{\{|\{\||\[\[|\]\]|'{2,}")
_HSPACE_RE = re.compile(r"[ \t\f\v\r]+")
_BLANK_LINES_RE = re.compile(r"\n{3,}")


def remove_comments(text: str) -> str:
    return _COMMENT_RE.sub("", text)


def remove_preformatted(text: str) -> str:
    return _PRE_RE.sub("", text)


def remove_source_code(text: str) -> str:
    return _SOURCE_RE.sub("", text)


def move_refs_to_end(text: str) -> str:
    """Cut every <ref> body out of the text and append it after a blank line."""
    text = _REF_EMPTY_RE.sub("", text)
    bodies = []

    def cut(match):
        body = match.group(1).strip()
        if body:
            bodies.append(body)
        return ""

    text = _REF_RE.sub(cut, text)
    for body in bodies:
        text += "\n\n" + body
    return text


def remove_templates(text: str, passes: int = 2) -> str:
    """Remove ``{{...}}``; each pass peels one nesting level from the inside.

    Whatever survives the passes is cut up to the first closer, or to the end
    of the text when there is none, so stray ``}}`` may remain as residue.
    """
    for _ in range(passes):
        text, n = _TEMPLATE_RE.subn("", text)
        if not n:
            break
    return _TEMPLATE_LEFTOVER_RE.sub("", text)


def remove_tables(text: str) -> str:
    for _ in range(_TABLE_PASSES):
        text, n = _TABLE_RE.subn("", text)
        if not n:
            break
    return _TABLE_LEFTOVER_RE.sub("", text)


def remove_accents(text: str) -> str:
    return text.replace("\u0301", "")


def unwrap_bold(text: str) -> str:
    return _BOLD_RE.sub(r"\1", text)


def unwrap_italic(text: str) -> str:
    text = _ITALIC_RE.sub(r"\1", text)
    return _APOSTROPHE_RUN_RE.sub("", text)


def _matching_close(text: str, start: int) -> int:
    """Index of the ``]]`` closing the ``[[`` at *start*, or -1."""
    depth = 0
    i = start
    n = len(text)
    while i < n - 1:
        pair = text[i:i + 2]
        if pair == "[[":
            depth += 1
            i += 2
        elif pair == "]]":
            depth -= 1
            if depth == 0:
                return i
            i += 2
        else:
            i += 1
    return -1


def _split_top_level(body: str) -> list:
    parts = []
    depth = 0
    last = 0
    i = 0
    while i < len(body):
        pair = body[i:i + 2]
        if pair == "[[":
            depth += 1
            i += 2
            continue
        if pair == "]]":
            depth = max(depth - 1, 0)
            i += 2
            continue
        if body[i] == "|" and depth == 0:
            parts.append(body[last:i])
            last = i + 1
        i += 1
    parts.append(body[last:])
    return parts


def image_caption(body: str) -> str:
    """Caption of an image link body (``Image:x.jpg|thumb|caption``)."""
    parts = _split_top_level(body)
    # the file name is never a caption; trailing option keywords are skipped
    for part in reversed(parts[1:]):
        caption = part.strip()
        if not _IMAGE_PARAM_RE.fullmatch(caption):
            return caption
    return ""


def extract_image_captions(text: str) -> str:
    pos = 0
    while True:
        match = _IMAGE_OPEN_RE.search(text, pos)
        if match is None:
            return text
        start = match.start()
        end = _matching_close(text, start)
        if end < 0:
            # unclosed: drop the rest of the line
            eol = text.find("\n", start)
            eol = len(text) if eol < 0 else eol
            text = text[:start] + text[eol:]
        else:
            text = text[:start] + image_caption(text[start + 2:end]) + text[end + 2:]
        pos = start


def _link_text(body: str, remove_interwiki: bool) -> str:
    target, pipe, label = body.partition("|")
    if target.startswith(":"):
        target = target[1:]
    elif _CATEGORY_RE.match(target):
        return ""
    else:
        iwiki = _INTERWIKI_RE.match(target)
        if iwiki is not None and not pipe:
            return "" if remove_interwiki else target[iwiki.end():].strip()
    label = label.strip()
    return label if label else target.strip()


def expand_links(text: str, remove_interwiki: bool = True) -> str:
    """Replace ``[[...]]`` links by their visible text, innermost first."""
    def repl(match):
        return _link_text(match.group(1), remove_interwiki)

    while True:
        text, n = _LINK_RE.subn(repl, text)
        if not n:
            break
    return text.replace("[[", "").replace("]]", "")


def is_url(token: str) -> bool:
    return _URL_RE.fullmatch(token) is not None


def expand_external_links(text: str) -> str:
    """``[url label]`` becomes the label with host-like words dropped."""
    def repl(match):
        if not is_url(match.group(1)):
            return match.group(0)
        label = match.group(2) or ""
        return " ".join(w for w in label.split() if not is_url(w))

    return _EXTLINK_RE.sub(repl, text)


def replace_unsafe(text: str) -> str:
    text = _ENTITY_RE.sub(" ", text)
    text = _BR_RE.sub("\n", text)
    return _UNSAFE_RE.sub(" ", text)


def _scrub(text: str) -> str:
    # Deleting one construct can splice two halves into a new one, so loop.
    while True:
        cleaned = expand_external_links(_DEBRIS_RE.sub("", text))
        if cleaned == text:
            return text
        text = cleaned


def normalize_whitespace(text: str) -> str:
    text = _HSPACE_RE.sub(" ", text)
    text = "\n".join(line.strip() for line in text.split("\n"))
    return _BLANK_LINES_RE.sub("\n\n", text).strip()


def convert(wikitext: str, config: ParserConfig = DEFAULT_CONFIG) -> str:
    text = wikitext.replace("\r\n", "\n")
    text = remove_comments(text)
    text = remove_preformatted(text)
    text = remove_source_code(text)
    text = move_refs_to_end(text)
    text = remove_templates(text, config.template_passes)
    text = remove_tables(text)
    text = remove_accents(text)
    text = unwrap_bold(text)
    text = unwrap_italic(text)
    text = extract_image_captions(text)
    text = expand_links(text, config.remove_not_expand_iwiki)
    text = expand_external_links(text)
    text = replace_unsafe(text)
    text = _scrub(text)
    return normalize_whitespace(text)


def parse_page(page: RawPage, config: ParserConfig = DEFAULT_CONFIG) -> PlainDoc:
    text = convert(page.wikitext, config)
    return PlainDoc(page_id=page.page_id, title=page.title, text=text,
                    word_count=count_tokens(text))
