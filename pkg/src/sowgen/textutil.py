"""Small text helpers used by several agents: tokenization, date and money
parsing, heading case. Kept dependency-free and deterministic."""

from __future__ import annotations

import datetime as _dt
import re
import zlib

# Internal punctuation stays inside a token ("non-disclosure", "U.S."),
# trailing punctuation does not ("approved." tokenizes as "approved").
WORD = re.compile(r"[A-Za-z0-9]+(?:['&.-][A-Za-z0-9]+)*")

# Words that stay lowercase in headings unless they lead.
TITLE_STOPWORDS = {"a", "an", "the", "of", "for", "and", "or", "to", "in"}

MONTHS = {
    "january": 1, "february": 2, "march": 3, "april": 4, "may": 5, "june": 6,
    "july": 7, "august": 8, "september": 9, "october": 10, "november": 11,
    "december": 12,
}

DATE_ISO = re.compile(r"\b(\d{4})-(\d{2})-(\d{2})\b")
DATE_LONG = re.compile(
    r"\b(January|February|March|April|May|June|July|August|September|October|"
    r"November|December)\s+(\d{1,2}),\s+(\d{4})\b"
)
MONEY = re.compile(r"([$€£])\s?(\d{1,3}(?:,\d{3})+|\d+)(?:\.(\d{1,2}))?")
DURATION = re.compile(r"\b(\d+)\s+(day|week|month|year)s?\b", re.IGNORECASE)

CURRENCY_BY_SYMBOL = {"$": "USD", "€": "EUR", "£": "GBP"}
_DURATION_UNIT = {"day": "D", "week": "W", "month": "M", "year": "Y"}


def word_tokens(text: str) -> list[tuple[str, int, int]]:
    """Word-ish tokens with [start, end) offsets."""
    return [(m.group(), m.start(), m.end()) for m in WORD.finditer(text)]


def token_set(text: str) -> set[str]:
    """Case-folded token set, hyphenated words kept whole ("non-disclosure")."""
    return {
        m.group().strip(".-'&")
        for m in WORD.finditer(text.casefold())
        if m.group().strip(".-'&")
    }


def split_tokens(text: str) -> list[str]:
    """Case-folded tokens split on every non-alphanumeric character."""
    return [t for t in re.split(r"[^0-9a-z]+", text.casefold()) if t]


def stable_bucket(token: str, buckets: int) -> int:
    """Process-independent hash bucket for a token."""
    return zlib.crc32(token.encode("utf-8")) % buckets


def title_case(text: str) -> str:
    """Heading case: capitalize each word except short connectives, which stay
    lowercase unless they open the heading."""
    words = text.split(" ")
    out = []
    for i, word in enumerate(words):
        lowered = word.lower()
        if i > 0 and lowered in TITLE_STOPWORDS:
            out.append(lowered)
        else:
            out.append(lowered[:1].upper() + lowered[1:])
    return " ".join(out)


def parse_iso_date(value: str) -> _dt.date | None:
    try:
        return _dt.date.fromisoformat(value.strip())
    except (ValueError, AttributeError):
        return None


def parse_date_surface(surface: str) -> str | None:
    """Normalize a matched date surface to ISO-8601, or None if invalid."""
    m = DATE_ISO.fullmatch(surface.strip())
    if m:
        y, mo, d = (int(g) for g in m.groups())
    else:
        m = DATE_LONG.fullmatch(surface.strip())
        if not m:
            return None
        mo = MONTHS[m.group(1).lower()]
        d, y = int(m.group(2)), int(m.group(3))
    try:
        return _dt.date(y, mo, d).isoformat()
    except ValueError:
        return None


def parse_money_surface(surface: str) -> tuple[str, int] | None:
    """Normalize a matched money surface to (currency code, minor units)."""
    m = MONEY.fullmatch(surface.strip())
    if not m:
        return None
    symbol, whole, cents = m.group(1), m.group(2), m.group(3)
    minor = int(whole.replace(",", "")) * 100
    if cents:
        minor += int(cents) if len(cents) == 2 else int(cents) * 10
    return CURRENCY_BY_SYMBOL[symbol], minor


def duration_iso(count: int, unit: str) -> str:
    return f"P{count}{_DURATION_UNIT[unit.lower()]}"


def contains_date(text: str) -> bool:
    for m in DATE_ISO.finditer(text):
        if parse_date_surface(m.group()):
            return True
    for m in DATE_LONG.finditer(text):
        if parse_date_surface(m.group()):
            return True
    return False
