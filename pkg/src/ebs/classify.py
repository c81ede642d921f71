"""Case analysis of windowed subsemiheaps.

A subsemiheap contained in a quadrant is described by its anchor
``(alpha0, beta0)`` (minimal row and column) and three suprema: the last
column occupied on the anchor row, the last row occupied on the anchor
column and the last occupied diagonal offset.  Only a handful of the 27
combinations occur; each occurring one corresponds to a family in
:mod:`ebs.sets`.

Inside a finite window a supremum is reported as ``INF`` when the
occupied positions on its line form a progression whose next term falls
outside the window.  A line showing only the anchor is completed to
``INF`` when the orthogonal line is periodic and the window is too short
to show the next term.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce

from .semigroup import DomainError, Element, element_from_json, element_to_json
from .sets import (
    ChainPlusLattice,
    ChainPlusLatticeUnion,
    DiagonalChain,
    ElementSet,
    Family,
    Lattice,
    LatticeUnion,
    Singleton,
    family_from_json,
)

INF = math.inf

OCCURRING = ("1.1.1", "1.1.2", "1.1.3", "3.3.3-(12)", "3.3.3-(13)")
EMPTY = "empty"

# (p, q, r) orderings of the refined case analysis for 3.3.3
_REFINED = {
    1: lambda p, q, r: r < p < q,
    2: lambda p, q, r: p < r < q,
    3: lambda p, q, r: p < q < r,
    4: lambda p, q, r: r < q < p,
    5: lambda p, q, r: q < r < p,
    6: lambda p, q, r: q < p < r,
    7: lambda p, q, r: r == p < q,
    8: lambda p, q, r: p == q < r,
    9: lambda p, q, r: r == q < p,
    10: lambda p, q, r: r < p == q,
    11: lambda p, q, r: p < r == q,
    12: lambda p, q, r: q < r == p,
    13: lambda p, q, r: r == p == q,
}


def _refined_adjoint() -> dict[int, int]:
    """Refined cases exchanged by transposition, which swaps p and r."""
    out = {}
    for p in range(1, 4):
        for q in range(1, 4):
            for r in range(1, 4):
                k = next(k for k, t in _REFINED.items() if t(p, q, r))
                out[k] = next(k for k, t in _REFINED.items() if t(r, q, p))
    return out


_REFINED_ADJOINT = _refined_adjoint()


@dataclass(frozen=True)
class Parameters:
    alpha0: int
    beta0: int
    beta_bar: float  # int or INF
    alpha_bar: float
    gamma_bar: float | None  # None: no diagonal member at all

    def to_json(self) -> dict:
        enc = lambda v: "INF" if v == INF else (None if v is None else int(v))
        return {"alpha0": self.alpha0, "beta0": self.beta0,
                "beta_bar": enc(self.beta_bar), "alpha_bar": enc(self.alpha_bar),
                "gamma_bar": enc(self.gamma_bar)}

    @classmethod
    def from_json(cls, d: dict) -> "Parameters":
        dec = lambda v: INF if v == "INF" else v
        return cls(d["alpha0"], d["beta0"], dec(d["beta_bar"]), dec(d["alpha_bar"]),
                   dec(d["gamma_bar"]))


@dataclass(frozen=True)
class ClassificationReport:
    parameters: Parameters | None
    case: str
    family: Family | None = None
    witness: tuple | None = None

    @property
    def ok(self) -> bool:
        return self.family is not None or self.case == EMPTY

    def to_json(self) -> dict:
        return {
            "parameters": None if self.parameters is None else self.parameters.to_json(),
            "case": self.case,
            "family": None if self.family is None else self.family.to_json(),
            "witness": None if self.witness is None else [element_to_json(e) for e in self.witness],
        }

    @classmethod
    def from_json(cls, d: dict) -> "ClassificationReport":
        return cls(
            None if d["parameters"] is None else Parameters.from_json(d["parameters"]),
            d["case"],
            None if d["family"] is None else family_from_json(d["family"]),
            None if d["witness"] is None else tuple(element_from_json(e) for e in d["witness"]),
        )


@dataclass
class _Lines:
    """Occupied offsets (relative to the anchor) on the three lines."""

    row: list[int]
    col: list[int]
    diag: list[int]
    off_diag: list[tuple[int, int]]
    width: int  # columns visible from beta0
    height: int  # rows visible from alpha0
    has_anchor: bool = field(init=False)

    def __post_init__(self):
        self.has_anchor = bool(self.diag) and self.diag[0] == 0


def _lines(s: ElementSet) -> tuple[int, int, _Lines]:
    members = list(s)
    a0 = min(e[0] for e in members)
    b0 = min(e[1] for e in members)
    row, col, diag, off = [], [], [], []
    for i, j in members:
        di, dj = i - a0, j - b0
        if di == 0:
            row.append(dj)
        if dj == 0:
            col.append(di)
        if di == dj:
            diag.append(di)
        else:
            off.append((di, dj))
    w = s.window
    return a0, b0, _Lines(sorted(row), sorted(col), sorted(diag), off,
                          w.col_end - b0, w.row_end - a0)


def _progression_step(offsets: list[int]) -> int | None:
    """Common step if ``offsets`` is a full progression from its first term."""
    if len(offsets) < 2:
        return None
    d = offsets[1] - offsets[0]
    if all(b - a == d for a, b in zip(offsets, offsets[1:])):
        return d
    return None


def _line_sup(offsets: list[int], horizon: int) -> tuple[float, int | None]:
    """(supremum, period) for a row or column line."""
    step = _progression_step(offsets)
    if step is not None and offsets[-1] + step >= horizon:
        return INF, step
    return offsets[-1], None


def _min_period(*ps):
    ps = [p for p in ps if p is not None]
    return min(ps) if ps else None


def _guard(horizon: int) -> int:
    return -(-horizon // 4)


def _sups(lines: _Lines) -> tuple[float, float, float | None, int | None]:
    beta_bar, p_row = _line_sup(lines.row, lines.width)
    alpha_bar, p_col = _line_sup(lines.col, lines.height)
    # horizon completion of a line that shows only the anchor
    if beta_bar == 0 and p_col is not None and p_col >= lines.width and lines.has_anchor:
        beta_bar, p_row = INF, p_col
    if alpha_bar == 0 and p_row is not None and p_row >= lines.height and lines.has_anchor:
        alpha_bar, p_col = INF, p_row
    diag_h = min(lines.width, lines.height)
    diag = lines.diag
    if not diag:
        return beta_bar, alpha_bar, None, _min_period(p_row, p_col)
    period = _min_period(p_row, p_col)
    if period is None and lines.off_diag:
        period = min(abs(i - j) for i, j in lines.off_diag)
    if period is not None:
        gamma_bar = INF if diag[-1] + period >= diag_h else diag[-1]
    elif len(diag) >= 2 and diag[-1] >= diag_h - _guard(diag_h):
        gamma_bar = INF
    else:
        gamma_bar = diag[-1]
    return beta_bar, alpha_bar, gamma_bar, period


def compute_parameters(s: ElementSet) -> Parameters:
    if not s:
        raise DomainError("parameters are undefined for the empty set")
    a0, b0, lines = _lines(s)
    beta_bar, alpha_bar, gamma_bar, _ = _sups(lines)
    shift = lambda v, base: v if v == INF or v is None else v + base
    return Parameters(a0, b0, shift(beta_bar, b0), shift(alpha_bar, a0), gamma_bar)


def _digit(v, base) -> str:
    if v == INF:
        return "3"
    if v is None or v == base:
        return "1"
    return "2"


def case_label(params: Parameters) -> str:
    """Primary three-level label from the parameters alone."""
    return ".".join((_digit(params.beta_bar, params.beta0),
                     _digit(params.alpha_bar, params.alpha0),
                     _digit(params.gamma_bar, 0)))


def refined_case(p: int, q: int, r: int) -> int:
    for k, test in _REFINED.items():
        if test(p, q, r):
            return k
    raise AssertionError((p, q, r))


def adjoint_label(label: str) -> str:
    """Label of the transposed set (rows and columns exchanged)."""
    inner = label
    wrapped = label.startswith("nonoccurring(")
    if wrapped:
        inner = label[len("nonoccurring("):-1]
    if inner == EMPTY:
        return label
    base, _, refined = inner.partition("-")
    b, a, g = base.split(".")
    out = f"{a}.{b}.{g}"
    if refined:
        out += f"-({_REFINED_ADJOINT[int(refined.strip('()'))]})"
    return f"nonoccurring({out})" if wrapped else out


def _first_positive(offsets):
    return next((x for x in offsets if x > 0), None)


def classify(s: ElementSet) -> ClassificationReport:
    """Label a window-closed set and recover the family it restricts."""
    if not s:
        return ClassificationReport(None, EMPTY)
    a0, b0, lines = _lines(s)
    beta_bar, alpha_bar, gamma_bar, _ = _sups(lines)
    shift = lambda v, base: v if v == INF or v is None else v + base
    params = Parameters(a0, b0, shift(beta_bar, b0), shift(alpha_bar, a0), gamma_bar)
    label = case_label(params)
    anchor = Element(a0, b0)

    if label == "3.3.3":
        p = _first_positive(lines.row)
        r = _first_positive(lines.col)
        p = p if p is not None else r
        r = r if r is not None else p
        q = _first_positive(lines.diag)
        if q is None:
            q = p
        label = f"3.3.3-({refined_case(p, q, r)})"

    if not lines.has_anchor or label not in OCCURRING:
        return ClassificationReport(params, f"nonoccurring({label})", None,
                                    (anchor,) if not lines.has_anchor else _witness(s, None))

    family = _match(label, anchor, lines, p if label.startswith("3") else None)
    if family is None or family.materialize(s.window) != s:
        return ClassificationReport(params, f"nonoccurring({label})", None, _witness(s, family))
    return ClassificationReport(params, label, family)


def _match(label, anchor, lines: _Lines, p) -> Family | None:
    diag = lines.diag
    if label == "1.1.1":
        return Singleton(anchor)
    if label == "1.1.2":
        return DiagonalChain(anchor, tuple(diag[1:]))
    if label == "1.1.3":
        if not lines.off_diag:
            return DiagonalChain(anchor, tuple(diag[1:]), infinite=True)
        start = min(min(i, j) for i, j in lines.off_diag)
        sigma = min(abs(i - j) for i, j in lines.off_diag)
        sigma = reduce(math.gcd, (abs(i - j) for i, j in lines.off_diag), sigma)
        if start < 1 or start not in diag:
            return None
        chain = tuple(d for d in diag if 0 < d < start)
        anchors = tuple(d for d in diag if start <= d < start + sigma)
        if len(anchors) == 1:
            return ChainPlusLattice(anchor, chain, start, sigma)
        return ChainPlusLatticeUnion(anchor, chain, anchors, sigma)
    if label == "3.3.3-(13)":
        return Lattice(anchor, p)
    if label == "3.3.3-(12)":
        return LatticeUnion(anchor, p, tuple(d for d in diag if d < p))
    return None


def _witness(s: ElementSet, family: Family | None) -> tuple:
    if family is None:
        return tuple(sorted(s))[:1]
    other = family.materialize(s.window)
    diff = [e for e in s.window.cells() if (e in s) != (e in other)]
    return tuple(diff[:4])


def canonical(f: Family) -> Family:
    """Normal form of a family, as :func:`classify` would report it."""
    if isinstance(f, DiagonalChain) and not f.offsets and not f.infinite:
        return Singleton(f.anchor)
    if isinstance(f, LatticeUnion):
        q0 = f.q[0]
        anchor = Element(f.anchor[0] + q0, f.anchor[1] + q0)
        if len(f.q) == 1:
            return Lattice(anchor, f.p)
        return LatticeUnion(anchor, f.p, tuple(q - q0 for q in f.q))
    if isinstance(f, ChainPlusLatticeUnion) and len(f.anchors) == 1:
        return ChainPlusLattice(f.anchor, f.chain, f.anchors[0], f.sigma)
    return f


def anchor_exclusion(s: ElementSet) -> tuple[int, int] | None:
    """Modulus ``m`` and residue ``c`` certifying that no subsemiheap
    containing ``s`` can contain the corner ``(alpha0, beta0)``.

    ``d(i, j) = i - j`` satisfies ``d(x y* z) = d(x) - d(y) + d(z)``, so
    the quadrant points with ``d`` congruent to ``c`` modulo ``m`` form a
    subsemiheap.  If every member lies in it and ``c`` is not ``0`` modulo
    ``m`` (``m = 0`` meaning plain equality) the corner is unreachable.
    """
    if not s:
        return None
    a0 = min(e[0] for e in s)
    b0 = min(e[1] for e in s)
    d = [(i - a0) - (j - b0) for i, j in s]
    m = reduce(math.gcd, (x - d[0] for x in d), 0)
    c = d[0] % m if m else d[0]
    return (m, c) if c else None
