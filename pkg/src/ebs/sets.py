"""Finite windows of Z x Z, membership sets, families and closure.

Subsemiheaps of the extended bicyclic semigroup are usually infinite, so
they are handled through a finite rectangular :class:`Window`.  Triple
products landing outside the window are ignored ("clip" semantics).
"""
from __future__ import annotations

import dataclasses
import re
from collections import deque
from dataclasses import dataclass
from typing import Callable, ClassVar, Iterable, Iterator

import numpy as np

from .semigroup import (
    DomainError,
    Element,
    adjoint,
    element_from_json,
    element_to_json,
    triple,
)

__all__ = [
    "Window", "ElementSet", "SemiheapCheck", "Family",
    "Singleton", "DiagonalChain", "ChainPlusLattice", "ChainPlusLatticeUnion",
    "Lattice", "LatticeUnion", "DiagonalSubset", "CornerIdeal",
    "family_materialize", "family_from_json", "is_window_semiheap",
    "closure", "closure_reference", "padded_closure", "parse_window",
]


@dataclass(frozen=True)
class Window:
    alpha: int
    beta: int
    height: int
    width: int

    def __post_init__(self):
        if self.height < 1 or self.width < 1:
            raise DomainError(f"window dimensions must be positive, got {self.height}x{self.width}")

    @property
    def size(self) -> int:
        return self.height * self.width

    @property
    def row_end(self) -> int:
        return self.alpha + self.height

    @property
    def col_end(self) -> int:
        return self.beta + self.width

    def __contains__(self, e) -> bool:
        return self.alpha <= e[0] < self.row_end and self.beta <= e[1] < self.col_end

    def index(self, e) -> int:
        return (e[0] - self.alpha) * self.width + (e[1] - self.beta)

    def cell(self, k: int) -> Element:
        r, c = divmod(k, self.width)
        return Element(self.alpha + r, self.beta + c)

    def cells(self) -> Iterator[Element]:
        for r in range(self.alpha, self.row_end):
            for c in range(self.beta, self.col_end):
                yield Element(r, c)

    def translate(self, d_alpha: int, d_beta: int) -> "Window":
        return Window(self.alpha + d_alpha, self.beta + d_beta, self.height, self.width)

    def transpose(self) -> "Window":
        return Window(self.beta, self.alpha, self.width, self.height)

    def grid(self) -> tuple[np.ndarray, np.ndarray]:
        """Absolute row and column index arrays of shape (height, width)."""
        return np.meshgrid(np.arange(self.alpha, self.row_end, dtype=np.int64),
                           np.arange(self.beta, self.col_end, dtype=np.int64),
                           indexing="ij")

    def spec(self) -> str:
        return f"{self.width}x{self.height}@({self.alpha},{self.beta})"

    def to_json(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_json(cls, d: dict) -> "Window":
        return cls(int(d["alpha"]), int(d["beta"]), int(d["height"]), int(d["width"]))


_WINDOW_RE = re.compile(r"^\s*(\d+)\s*x\s*(\d+)\s*@\s*\(\s*([+-]?\d+)\s*,\s*([+-]?\d+)\s*\)\s*$")


def parse_window(text: str) -> Window:
    """Parse ``"WxH@(a,b)"``: width W, height H, top-left cell ``(a, b)``."""
    m = _WINDOW_RE.match(text)
    if not m:
        raise ValueError(f"cannot parse window {text!r}; expected 'WxH@(a,b)'")
    w, h, a, b = (int(g) for g in m.groups())
    return Window(a, b, h, w)


class ElementSet:
    """Immutable set of cells of a window, stored as a row-major bitmask."""

    __slots__ = ("window", "mask")

    def __init__(self, window: Window, mask: int = 0):
        if mask < 0 or mask >> window.size:
            raise DomainError("membership mask does not fit the window")
        self.window = window
        self.mask = mask

    @classmethod
    def from_members(cls, window: Window, members: Iterable) -> "ElementSet":
        mask = 0
        for e in members:
            if e not in window:
                raise DomainError(f"{tuple(e)} lies outside window {window.spec()}")
            mask |= 1 << window.index(e)
        return cls(window, mask)

    @classmethod
    def from_array(cls, window: Window, grid: np.ndarray) -> "ElementSet":
        flat = np.flatnonzero(np.asarray(grid, dtype=bool).reshape(-1))
        mask = 0
        for k in flat.tolist():
            mask |= 1 << k
        return cls(window, mask)

    def to_array(self) -> np.ndarray:
        w = self.window
        out = np.zeros(w.size, dtype=bool)
        m, k = self.mask, 0
        while m:
            if m & 1:
                out[k] = True
            m >>= 1
            k += 1
        return out.reshape(w.height, w.width)

    def __contains__(self, e) -> bool:
        return e in self.window and bool(self.mask >> self.window.index(e) & 1)

    def __iter__(self) -> Iterator[Element]:
        m, w = self.mask, self.window
        while m:
            low = m & -m
            yield w.cell(low.bit_length() - 1)
            m ^= low

    def __len__(self) -> int:
        return bin(self.mask).count("1")

    def __bool__(self) -> bool:
        return self.mask != 0

    def __eq__(self, other) -> bool:
        if not isinstance(other, ElementSet):
            return NotImplemented
        return self.window == other.window and self.mask == other.mask

    def __hash__(self) -> int:
        return hash((self.window, self.mask))

    def __repr__(self) -> str:
        return f"ElementSet({self.window.spec()}, {[tuple(e) for e in self]})"

    def issubset(self, other: "ElementSet") -> bool:
        if self.window != other.window:
            return all(e in other for e in self)
        return self.mask & ~other.mask == 0

    def members(self) -> list[Element]:
        return list(self)

    def restrict(self, window: Window) -> "ElementSet":
        return ElementSet.from_members(window, (e for e in self if e in window))

    def translate(self, d_alpha: int, d_beta: int) -> "ElementSet":
        return ElementSet(self.window.translate(d_alpha, d_beta), self.mask)

    def adjoint(self) -> "ElementSet":
        w = self.window.transpose()
        return ElementSet.from_members(w, (adjoint(e) for e in self))

    def render(self, charset: str = "unicode") -> str:
        on, off = ("●", "○") if charset == "unicode" else ("#", ".")
        grid = self.to_array()
        return "\n".join(" ".join(on if v else off for v in row) for row in grid)

    def to_json(self) -> dict:
        return {"window": self.window.to_json(), "members": [element_to_json(e) for e in self]}

    @classmethod
    def from_json(cls, d: dict) -> "ElementSet":
        w = Window.from_json(d["window"])
        return cls.from_members(w, (element_from_json(m) for m in d["members"]))


# --------------------------------------------------------------------------
# Families


def _lattice_grid(R, C, a, b, period):
    dr, dc = R - a, C - b
    return (dr >= 0) & (dc >= 0) & (dr % period == 0) & (dc % period == 0)


def _diag_grid(R, C, a, b, offsets):
    dr = R - a
    out = (dr == C - b) & np.isin(dr, np.asarray(sorted(offsets), dtype=np.int64))
    return out


def _ascending(xs, name, low=1):
    xs = tuple(int(x) for x in xs)
    if any(x < low for x in xs) or any(x >= y for x, y in zip(xs, xs[1:])):
        raise DomainError(f"{name} must be strictly ascending integers >= {low}, got {list(xs)}")
    return xs


class Family:
    """Symbolic (possibly infinite) subset of E, materializable in a window."""

    tag: ClassVar[str]

    def grid(self, R: np.ndarray, C: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def contains(self, e) -> bool:
        return bool(self.grid(np.array([e[0]], dtype=np.int64), np.array([e[1]], dtype=np.int64))[0])

    __contains__ = contains

    def materialize(self, window: Window) -> ElementSet:
        R, C = window.grid()
        return ElementSet.from_array(window, self.grid(R, C))

    def translate(self, d_alpha: int, d_beta: int) -> "Family":
        raise NotImplementedError

    def adjoint(self) -> "Family":
        """The family of adjoints; every constructor here is transpose-closed."""
        raise NotImplementedError

    def extent(self) -> int:
        """Largest offset from the anchor the defining parameters mention."""
        return 0

    def to_json(self) -> dict:
        d = {"tag": self.tag}
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if isinstance(v, Element):
                v = element_to_json(v)
            elif isinstance(v, tuple):
                v = list(v)
            d[f.name] = v
        return d


@dataclass(frozen=True)
class Singleton(Family):
    tag: ClassVar[str] = "Singleton"
    p: Element

    def grid(self, R, C):
        return (R == self.p[0]) & (C == self.p[1])

    def translate(self, da, db):
        return Singleton(Element(self.p[0] + da, self.p[1] + db))

    def adjoint(self):
        return Singleton(adjoint(self.p))


@dataclass(frozen=True)
class DiagonalChain(Family):
    """The anchor plus diagonal points ``anchor + (k, k)`` for listed offsets.

    ``infinite`` records that the chain is known to continue past the
    window; membership is still given by the listed offsets only.
    """

    tag: ClassVar[str] = "DiagonalChain"
    anchor: Element
    offsets: tuple = ()
    infinite: bool = False

    def __post_init__(self):
        object.__setattr__(self, "offsets", _ascending(self.offsets, "chain offsets"))

    def grid(self, R, C):
        return _diag_grid(R, C, self.anchor[0], self.anchor[1], (0,) + self.offsets)

    def translate(self, da, db):
        return dataclasses.replace(self, anchor=Element(self.anchor[0] + da, self.anchor[1] + db))

    def adjoint(self):
        return dataclasses.replace(self, anchor=adjoint(self.anchor))

    def extent(self):
        return self.offsets[-1] if self.offsets else 0


class _ChainLattice(Family):
    """Anchor, isolated diagonal chain, then period-``sigma`` lattices."""

    def _validate(self):
        object.__setattr__(self, "chain", _ascending(self.chain, "chain offsets"))
        if self.sigma < 1:
            raise DomainError(f"sigma must be >= 1, got {self.sigma}")
        anchors = self.anchors
        if not anchors or anchors[0] < 1:
            raise DomainError("the lattice start must be >= 1")
        if self.chain and self.chain[-1] >= anchors[0]:
            raise DomainError("chain offsets must precede the lattice start")
        if anchors[-1] >= anchors[0] + self.sigma:
            raise DomainError("lattice anchors must lie in [start, start + sigma)")

    def grid(self, R, C):
        a, b = self.anchor
        out = _diag_grid(R, C, a, b, (0,) + self.chain)
        for k in self.anchors:
            out |= _lattice_grid(R, C, a + k, b + k, self.sigma)
        return out

    def translate(self, da, db):
        return dataclasses.replace(self, anchor=Element(self.anchor[0] + da, self.anchor[1] + db))

    def adjoint(self):
        return dataclasses.replace(self, anchor=adjoint(self.anchor))

    def extent(self):
        return self.anchors[-1]


@dataclass(frozen=True)
class ChainPlusLattice(_ChainLattice):
    tag: ClassVar[str] = "ChainPlusLattice"
    anchor: Element
    chain: tuple
    start: int
    sigma: int

    def __post_init__(self):
        self._validate()

    @property
    def anchors(self) -> tuple:
        return (self.start,)


@dataclass(frozen=True)
class ChainPlusLatticeUnion(_ChainLattice):
    """``anchors`` are the diagonal offsets of the lattice bases; the first is
    the lattice start and all lie in ``[start, start + sigma)``."""

    tag: ClassVar[str] = "ChainPlusLatticeUnion"
    anchor: Element
    chain: tuple
    anchors: tuple
    sigma: int

    def __post_init__(self):
        object.__setattr__(self, "anchors", _ascending(self.anchors, "lattice anchors"))
        self._validate()

    @property
    def start(self) -> int:
        return self.anchors[0]


@dataclass(frozen=True)
class Lattice(Family):
    tag: ClassVar[str] = "Lattice"
    anchor: Element
    p: int

    def __post_init__(self):
        if self.p < 1:
            raise DomainError(f"lattice period must be >= 1, got {self.p}")

    def grid(self, R, C):
        return _lattice_grid(R, C, self.anchor[0], self.anchor[1], self.p)

    def translate(self, da, db):
        return dataclasses.replace(self, anchor=Element(self.anchor[0] + da, self.anchor[1] + db))

    def adjoint(self):
        return dataclasses.replace(self, anchor=adjoint(self.anchor))

    def extent(self):
        return self.p


@dataclass(frozen=True)
class LatticeUnion(Family):
    """Union of period-``p`` lattices based at ``anchor + (q, q)`` for each q."""

    tag: ClassVar[str] = "LatticeUnion"
    anchor: Element
    p: int
    q: tuple

    def __post_init__(self):
        if self.p < 1:
            raise DomainError(f"lattice period must be >= 1, got {self.p}")
        q = _ascending(self.q, "diagonal offsets", low=0)
        if not q or q[-1] >= self.p:
            raise DomainError(f"diagonal offsets must be a nonempty subset of [0, {self.p})")
        object.__setattr__(self, "q", q)

    def grid(self, R, C):
        a, b = self.anchor
        out = np.zeros(np.shape(R), dtype=bool)
        for k in self.q:
            out |= _lattice_grid(R, C, a + k, b + k, self.p)
        return out

    def translate(self, da, db):
        return dataclasses.replace(self, anchor=Element(self.anchor[0] + da, self.anchor[1] + db))

    def adjoint(self):
        return dataclasses.replace(self, anchor=adjoint(self.anchor))

    def extent(self):
        return self.p


@dataclass(frozen=True)
class DiagonalSubset(Family):
    """``{anchor + (k, k) : k in J}`` for an arbitrary finite J of naturals."""

    tag: ClassVar[str] = "DiagonalSubset"
    anchor: Element
    offsets: tuple

    def __post_init__(self):
        object.__setattr__(self, "offsets", _ascending(self.offsets, "offsets", low=0))

    def grid(self, R, C):
        return _diag_grid(R, C, self.anchor[0], self.anchor[1], self.offsets)

    def translate(self, da, db):
        return dataclasses.replace(self, anchor=Element(self.anchor[0] + da, self.anchor[1] + db))

    def adjoint(self):
        return dataclasses.replace(self, anchor=adjoint(self.anchor))

    def extent(self):
        return self.offsets[-1] if self.offsets else 0


@dataclass(frozen=True)
class CornerIdeal(Family):
    """``a_ii E a_jj = {a_pq : p >= i, q >= j}``."""

    tag: ClassVar[str] = "CornerIdeal"
    i: int
    j: int

    def grid(self, R, C):
        return (R >= self.i) & (C >= self.j)

    def translate(self, da, db):
        return CornerIdeal(self.i + da, self.j + db)

    def adjoint(self):
        return CornerIdeal(self.j, self.i)


FAMILIES: dict[str, type] = {cls.tag: cls for cls in (
    Singleton, DiagonalChain, ChainPlusLattice, ChainPlusLatticeUnion,
    Lattice, LatticeUnion, DiagonalSubset, CornerIdeal)}


def family_from_json(d: dict) -> Family:
    """Inverse of ``Family.to_json``; raises ``ValueError`` on malformed input."""
    if not isinstance(d, dict) or d.get("tag") not in FAMILIES:
        raise ValueError(f"unknown family {d!r}")
    cls = FAMILIES[d["tag"]]
    kwargs = {}
    try:
        for key, value in d.items():
            if key == "tag":
                continue
            if key in ("p", "anchor") and isinstance(value, list):
                value = element_from_json(value)
            elif isinstance(value, list):
                value = tuple(int(v) for v in value)
            kwargs[key] = value
        return cls(**kwargs)
    except (TypeError, DomainError) as exc:
        raise ValueError(f"bad parameters for {d['tag']}: {exc}") from None


def family_materialize(f: Family, w: Window) -> ElementSet:
    return f.materialize(w)


# --------------------------------------------------------------------------
# Window closure checks


@dataclass(frozen=True)
class SemiheapCheck:
    ok: bool
    witness: tuple | None = None  # (x, y, z, x y* z)

    def __bool__(self) -> bool:
        return self.ok


def _pairs_multipliers(r: np.ndarray, c: np.ndarray):
    """``x y*`` for every ordered pair of points, as arrays (A, T).

    ``x y* z`` then equals ``(A + max(z.i - T, 0), z.j + max(T - z.i, 0))``.
    """
    diff = c[None, :] - c[:, None]
    A = r[:, None] + np.maximum(diff, 0)
    T = r[None, :] + np.maximum(-diff, 0)
    return A, T


def _unique_multipliers(r, c, w: Window):
    """Distinct ``(A, T)`` that can still land in ``w`` (results sit in rows ``>= A``)."""
    A, T = _pairs_multipliers(r, c)
    keep = A < w.row_end
    A, T = A[keep], T[keep]
    if not len(A):
        return A, T
    t0 = int(T.min())
    table = np.zeros((w.row_end - w.alpha, int(T.max()) - t0 + 1), dtype=bool)
    table[A - w.alpha, T - t0] = True
    a, t = np.nonzero(table)
    return a.astype(np.int64) + w.alpha, t.astype(np.int64) + t0


def _apply(A, T, r, c):
    d = r[None, :] - T[:, None]
    return A[:, None] + np.maximum(d, 0), c[None, :] + np.maximum(-d, 0)


def _members_arrays(s: ElementSet):
    rr, cc = np.nonzero(s.to_array())
    return rr.astype(np.int64) + s.window.alpha, cc.astype(np.int64) + s.window.beta


def is_window_semiheap(s: ElementSet) -> SemiheapCheck:
    """Every in-window triple product of members is a member."""
    if not s:
        return SemiheapCheck(True)
    w = s.window
    grid = s.to_array()
    r, c = _members_arrays(s)
    A, T = _unique_multipliers(r, c, w)
    rows, cols = _apply(A, T, r, c)
    inside = (rows >= w.alpha) & (rows < w.row_end) & (cols >= w.beta) & (cols < w.col_end)
    bad = inside.copy()
    bad[inside] = ~grid[rows[inside] - w.alpha, cols[inside] - w.beta]
    if not bad.any():
        return SemiheapCheck(True)
    # failure path: report the first violating triple in row-major order
    members = list(s)
    for x in members:
        for y in members:
            for z in members:
                t, _ = triple(x, y, z)
                if t in w and t not in s:
                    return SemiheapCheck(False, (x, y, z, t))
    raise AssertionError("vectorized and scalar closure checks disagree")


def _saturate(grid: np.ndarray, w: Window) -> np.ndarray:
    grid = grid.copy()
    count = int(grid.sum())
    while count:
        rr, cc = np.nonzero(grid)
        r = rr.astype(np.int64) + w.alpha
        c = cc.astype(np.int64) + w.beta
        A, T = _unique_multipliers(r, c, w)
        rows, cols = _apply(A, T, r, c)
        inside = (rows >= w.alpha) & (rows < w.row_end) & (cols >= w.beta) & (cols < w.col_end)
        grid[rows[inside] - w.alpha, cols[inside] - w.beta] = True
        new = int(grid.sum())
        if new == count:
            break
        count = new
    return grid


def closure(generators: Iterable, workspace: Window) -> ElementSet:
    """Least superset of ``generators`` closed under in-workspace triples."""
    gens = ElementSet.from_members(workspace, generators)
    return ElementSet.from_array(workspace, _saturate(gens.to_array(), workspace))


def closure_reference(generators: Iterable, workspace: Window) -> ElementSet:
    """FIFO worklist saturation in pure Python; slow, used as a test oracle."""
    members: list[Element] = []
    seen: set[Element] = set()
    queue: deque[Element] = deque()
    for g in generators:
        g = Element(*g)
        if g not in workspace:
            raise DomainError(f"generator {tuple(g)} outside workspace")
        if g not in seen:
            seen.add(g)
            queue.append(g)
    while queue:
        e = queue.popleft()
        members.append(e)
        found = []
        for x in members:
            for y in members:
                for t in (triple(e, x, y)[0], triple(x, e, y)[0], triple(x, y, e)[0]):
                    if t in workspace and t not in seen:
                        seen.add(t)
                        found.append(t)
        queue.extend(found)
    return ElementSet.from_members(workspace, seen)


def padded_workspace(inner: Window, pad_factor: int) -> Window:
    if pad_factor < 1:
        raise DomainError(f"pad_factor must be >= 1, got {pad_factor}")
    pad = pad_factor * max(inner.height, inner.width)
    return Window(inner.alpha, inner.beta, inner.height + pad, inner.width + pad)


def padded_closure(generators: Iterable, inner: Window, pad_factor: int = 3) -> ElementSet:
    """Closure in a workspace grown right and down, restricted to ``inner``.

    Triple products never move above or left of their inputs, so only the
    right and bottom sides need padding.
    """
    gens = list(generators)
    for g in gens:
        if g not in inner:
            raise DomainError(f"generator {tuple(g)} outside inner window")
    work = padded_workspace(inner, pad_factor)
    full = closure(gens, work).to_array()
    return ElementSet.from_array(inner, full[: inner.height, : inner.width])


def predicate(k) -> Callable[[Element], bool]:
    """Membership predicate for a Family or an ElementSet."""
    if isinstance(k, Family):
        return k.contains
    if isinstance(k, ElementSet):
        return k.__contains__
    raise TypeError(f"expected Family or ElementSet, got {type(k).__name__}")
