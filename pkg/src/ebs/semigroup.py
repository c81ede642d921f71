"""Exact arithmetic in the extended bicyclic semigroup.

An element ``a_ij`` is named by its index pair ``(i, j)`` in Z x Z.  The
product is

    a_ij a_pq = a_{i+p-min(j,p), j+q-min(j,p)}

and the adjoint is ``a_ij* = a_ji``.  There is no zero element.
"""
from __future__ import annotations

import enum
import re
from typing import NamedTuple

INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class RangeError(OverflowError):
    """A result (or argument) does not fit the supported index range."""


class Element(NamedTuple):
    i: int
    j: int

    def __str__(self) -> str:
        return f"({self.i},{self.j})"


class TripleCase(enum.Enum):
    I = "I"
    II = "II"
    III = "III"
    IV = "IV"


def _check(v: int) -> int:
    if v < INT64_MIN or v > INT64_MAX:
        raise RangeError(f"index {v} outside the 64-bit range")
    return v


def _elem(i: int, j: int) -> Element:
    return Element(_check(i), _check(j))


def product(a, b) -> Element:
    i, j = a
    p, q = b
    m = min(j, p)
    return _elem(i + p - m, j + q - m)


def adjoint(a) -> Element:
    i, j = a
    return Element(j, i)


def is_idempotent(a) -> bool:
    return a[0] == a[1]


def idempotent_le(a, b) -> bool:
    """``a <= b`` in the natural order on idempotents (a_ii <= a_jj iff j <= i)."""
    if not (is_idempotent(a) and is_idempotent(b)):
        raise DomainError(f"idempotent_le needs diagonal elements, got {a!r}, {b!r}")
    return b[1] <= a[0]


def triple(a, b, c) -> tuple[Element, TripleCase]:
    """Closed-form ``a b* c`` with the branch that produced it.

    Branches are tried in the order I, II, III, IV; on ties the first
    applicable one is reported (all applicable branches agree in value).
    """
    i, j = a
    p, q = b
    r, s = c
    if q <= j:
        t = p + j - q
        if r <= t:
            return _elem(i, s + t - r), TripleCase.I
        return _elem(i + r - t, s), TripleCase.II
    if r >= p:
        return _elem(i + q - j + r - p, s), TripleCase.III
    return _elem(i + q - j, s + p - r), TripleCase.IV


def triple_branches(a, b, c) -> dict[TripleCase, Element]:
    """Every branch of the four-case formula whose conditions hold."""
    i, j = a
    p, q = b
    r, s = c
    out = {}
    if q <= j and r <= p + j - q:
        out[TripleCase.I] = _elem(i, s + p + j - q - r)
    if q <= j and r >= p + j - q:
        out[TripleCase.II] = _elem(i + r - p - j + q, s)
    if q >= j and r >= p:
        out[TripleCase.III] = _elem(i + q - j + r - p, s)
    if q >= j and r <= p:
        out[TripleCase.IV] = _elem(i + q - j, s + p - r)
    return out


def triple_oracle(a, b, c) -> Element:
    return product(product(a, adjoint(b)), c)


def translate(a, d_alpha: int, d_beta: int) -> Element:
    return _elem(a[0] + d_alpha, a[1] + d_beta)


def derived_pair_neg(a, g) -> list[tuple[str, Element]]:
    """Elements forced into any subsemiheap containing ``a`` and ``g``.

    Requires ``g`` to lie weakly down-right of ``a``.  ``x4`` is present when
    the row gap does not exceed the column gap, ``x5`` in the opposite case,
    both when the gaps are equal.
    """
    al, be = a
    ga, de = g
    if ga < al or de < be:
        raise DomainError(f"derived_pair_neg needs g >= a coordinatewise, got {a!r}, {g!r}")
    h, b = ga - al, de - be
    out = [
        ("x1", _elem(al + b, be + h)),
        ("x2", _elem(al + b, de)),
        ("x3", _elem(ga, be + h)),
    ]
    if h <= b:
        out.append(("x4", _elem(ga, de + b - h)))
    if h >= b:
        out.append(("x5", _elem(ga + h - b, de)))
    return out


def derived_pair_pos(a, g) -> list[tuple[str, Element]]:
    """As :func:`derived_pair_neg` for ``g`` weakly down-left of ``a``."""
    al, be = a
    ga, de = g
    if ga < al or de > be:
        raise DomainError(f"derived_pair_pos needs g.i >= a.i and g.j <= a.j, got {a!r}, {g!r}")
    h, b = ga - al, be - de
    return [
        ("x1", _elem(al, be + h + b)),
        ("x2", _elem(ga + b, be)),
        ("x3", _elem(ga, be + h)),
        ("x4", _elem(ga + b + h, de)),
    ]


_ELEMENT_RE = re.compile(r"^\s*\(\s*([+-]?\d+)\s*,\s*([+-]?\d+)\s*\)\s*$")


def parse_element(text: str) -> Element:
    m = _ELEMENT_RE.match(text)
    if not m:
        raise ValueError(f"cannot parse element {text!r}; expected '(i,j)'")
    return _elem(int(m.group(1)), int(m.group(2)))


def element_from_json(value) -> Element:
    if (not isinstance(value, (list, tuple)) or len(value) != 2
            or not all(isinstance(v, int) and not isinstance(v, bool) for v in value)):
        raise ValueError(f"element must be a two-integer array, got {value!r}")
    return _elem(value[0], value[1])


def element_to_json(e) -> list[int]:
    return [int(e[0]), int(e[1])]
