"""Tokenizer shared by the polynomial and form text formats.

A term is an optional integer coefficient followed by factors joined by
``*`` or whitespace.  A factor is ``name`` or ``name^e``; differentials
are ``dname`` and wedge together with ``^`` (``dx0^dx1``).
"""
from __future__ import annotations

import re

_TOKEN = re.compile(r"\s*(\d+|d[a-z]\d*|[a-z]\d*|\^|\*|\+|-)")


class ParseError(ValueError):
    pass


def tokenize(text: str) -> list[str]:
    pos, out = 0, []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r} at {pos} in {text!r}")
        out.append(m.group(1))
        pos = m.end()
    return out


def parse_terms(text: str) -> list[tuple[int, list[tuple[str, int]], list[str]]]:
    """Split into ``(coeff, [(var, exp), ...], [differential names])`` triples."""
    toks = tokenize(text)
    terms = []
    i = 0
    sign = 1
    if not toks:
        raise ParseError("empty expression")
    while i < len(toks):
        if toks[i] in "+-":
            sign = -1 if toks[i] == "-" else 1
            i += 1
        coeff = 1
        factors: list[tuple[str, int]] = []
        diffs: list[str] = []
        seen = False
        while i < len(toks) and toks[i] not in "+-":
            tok = toks[i]
            if tok == "*":
                i += 1
                continue
            if tok.isdigit():
                coeff *= int(tok)
                i += 1
            elif tok.startswith("d") and len(tok) > 1:
                diffs.append(tok[1:])
                i += 1
                while i + 1 < len(toks) and toks[i] == "^" and toks[i + 1].startswith("d"):
                    diffs.append(toks[i + 1][1:])
                    i += 2
            elif tok == "^":
                raise ParseError(f"dangling '^' in {text!r}")
            else:
                exp = 1
                if i + 2 < len(toks) and toks[i + 1] == "^" and toks[i + 2].isdigit():
                    exp = int(toks[i + 2])
                    i += 3
                else:
                    i += 1
                factors.append((tok, exp))
            seen = True
        if not seen:
            raise ParseError(f"empty term in {text!r}")
        terms.append((sign * coeff, factors, diffs))
        sign = 1
    return terms


def signed(c: int, p: int) -> int:
    """Representative of ``c`` mod ``p`` in ``(-p/2, p/2]``."""
    c %= p
    return c - p if c > p // 2 else c


def join_terms(pieces: list[tuple[int, str]], p: int) -> str:
    """Render ``[(coeff, body), ...]`` as a signed sum; empty body means 1."""
    if not pieces:
        return "0"
    out = ""
    for i, (c, body) in enumerate(pieces):
        c = signed(c, p)
        mag = abs(c)
        if body:
            coef = "" if mag == 1 else f"{mag}*"
            text = coef + body
        else:
            text = str(mag)
        if i == 0:
            out = ("-" if c < 0 else "") + text
        else:
            out += (" - " if c < 0 else " + ") + text
    return out
