"""Text normalization and tokenization.

Titles, queries and keyphrases all pass through :func:`tokenize` so that
every downstream comparison is done on the same token alphabet.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass, field
from typing import Iterable, Optional, Tuple

TokenList = Tuple[str, ...]

_SPLIT = re.compile(r"[^\w]+|_", re.UNICODE)
# "men's" -> "men"; other contractions just split at the apostrophe
_POSSESSIVE = re.compile(r"(?<=\w)['\u2019]s\b", re.UNICODE)
_WHITESPACE = re.compile(r"\s+", re.UNICODE)


@dataclass(frozen=True)
class NormalizationConfig:
    lowercase: bool = True
    strip_punctuation: bool = True
    fold_plurals: bool = True
    stopwords: frozenset = field(default_factory=frozenset)
    max_tokens: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "stopwords", frozenset(w.casefold() for w in self.stopwords))
        if self.max_tokens is not None and self.max_tokens < 1:
            raise ValueError("max_tokens must be positive or None")

    def to_dict(self) -> dict:
        return {
            "lowercase": self.lowercase,
            "strip_punctuation": self.strip_punctuation,
            "fold_plurals": self.fold_plurals,
            "stopwords": sorted(self.stopwords),
            "max_tokens": self.max_tokens,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "NormalizationConfig":
        return cls(
            lowercase=bool(data.get("lowercase", True)),
            strip_punctuation=bool(data.get("strip_punctuation", True)),
            fold_plurals=bool(data.get("fold_plurals", True)),
            stopwords=frozenset(data.get("stopwords", ())),
            max_tokens=data.get("max_tokens"),
        )


DEFAULT_NORMALIZATION = NormalizationConfig()


def fold_plural(token: str) -> str:
    """Naive plural folding: drop one trailing ``s`` from tokens of length >= 4.

    ``ss`` endings are kept ("dress", "glass"), as is an ``s`` not preceded
    by a letter ("men's" with punctuation kept).
    """
    if len(token) >= 4 and token.endswith("s") and token[-2].isalpha() and token[-2] not in "sS":
        return token[:-1]
    return token


def _raw_pieces(text: str, config: NormalizationConfig) -> Iterable[str]:
    if config.strip_punctuation:
        return (p for p in _SPLIT.split(_POSSESSIVE.sub("", text)) if p)
    return (p for p in _WHITESPACE.split(text) if p)


def tokenize(text: str, config: NormalizationConfig = DEFAULT_NORMALIZATION) -> TokenList:
    """Split ``text`` into an ordered tuple of normalized tokens.

    Duplicates and order are preserved. Stopwords are matched after case
    folding and plural folding.

    >>> tokenize("Reebok Men's Shoes size 9")
    ('reebok', 'men', 'shoe', 'size', '9')
    """
    if not text:
        return ()
    text = unicodedata.normalize("NFC", text)
    if config.lowercase:
        text = text.casefold()
    out = []
    for tok in _raw_pieces(text, config):
        if config.fold_plurals:
            tok = fold_plural(tok)
        if tok.casefold() in config.stopwords:
            continue
        out.append(tok)
        if config.max_tokens is not None and len(out) >= config.max_tokens:
            break
    return tuple(out)


def detokenize(tokens: Iterable[str]) -> str:
    return " ".join(tokens)
