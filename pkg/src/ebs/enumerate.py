"""Exhaustive enumeration of window-semiheaps and the cross-validation sweep."""
from __future__ import annotations

import itertools
import os
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterator

import numpy as np

from .classify import EMPTY, OCCURRING, anchor_exclusion, classify
from .semigroup import RangeError, triple
from .sets import ElementSet, Window, closure, padded_closure

MAX_CELLS = 25
CHUNK = 1 << 20


def _constraints(w: Window) -> list[tuple[int, int]]:
    """(premise mask, conclusion bit) for every non-trivial in-window triple."""
    cells = list(w.cells())
    out = set()
    for (x, a), (y, b), (z, c) in itertools.product(enumerate(cells), repeat=3):
        t, _ = triple(a, b, c)
        if t in w:
            k = w.index(t)
            if k not in (x, y, z):
                out.add(((1 << x) | (1 << y) | (1 << z), k))
    # small premises first: they kill the most subsets early
    return sorted(out, key=lambda mk: (bin(mk[0]).count("1"), mk))


def _sweep_range(w: Window, start: int, stop: int, constraints=None) -> np.ndarray:
    if constraints is None:
        constraints = _constraints(w)
    dtype = np.uint32 if w.size <= 32 else np.uint64
    alive = np.arange(start, stop, dtype=dtype)
    one = dtype(1)
    for m, k in constraints:
        m = dtype(m)
        bad = ((alive & m) == m) & (((alive >> dtype(k)) & one) == 0)
        if bad.any():
            alive = alive[~bad]
            if not len(alive):
                break
    return alive


def _sweep_task(args) -> np.ndarray:
    w, start, stop = args
    return _sweep_range(w, start, stop)


def window_semiheap_masks(w: Window, jobs: int = 1) -> np.ndarray:
    """Bitmasks (row-major cell bits) of every window-semiheap, ascending."""
    if w.size > MAX_CELLS:
        raise RangeError(f"window has {w.size} cells; brute force is limited to {MAX_CELLS}")
    total = 1 << w.size
    ranges = [(w, s, min(s + CHUNK, total)) for s in range(0, total, CHUNK)]
    if jobs > 1 and len(ranges) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            parts = list(ex.map(_sweep_task, ranges))
    else:
        cons = _constraints(w)
        parts = [_sweep_range(w, s, e, cons) for _, s, e in ranges]
    return np.concatenate(parts)


def enumerate_window_semiheaps(w: Window, jobs: int = 1) -> tuple[int, Iterator[ElementSet]]:
    """Count and stream all window-semiheaps of ``w`` by exhaustive sweep."""
    masks = window_semiheap_masks(w, jobs)
    return len(masks), (ElementSet(w, int(m)) for m in masks)


def search_window_semiheaps(w: Window) -> Iterator[ElementSet]:
    """Closed sets of ``w`` by branch-and-closure search.

    Each node fixes the lowest undecided cell as excluded or included; an
    inclusion is followed by closure inside the window and pruned if it
    reaches an excluded cell.  Output order is not the subset order.
    """
    n = w.size
    full = (1 << n) - 1

    def close(mask: int) -> int:
        return closure(ElementSet(w, mask), w).mask

    stack = [(0, 0)]  # (members, excluded)
    while stack:
        inc, exc = stack.pop()
        free = full & ~(inc | exc)
        if not free:
            yield ElementSet(w, inc)
            continue
        k = (free & -free).bit_length() - 1
        stack.append((inc, exc | (1 << k)))
        grown = close(inc | (1 << k))
        if not grown & exc:
            stack.append((grown, exc))


def count_window_semiheaps(w: Window, jobs: int = 1) -> int:
    if w.size <= MAX_CELLS:
        return len(window_semiheap_masks(w, jobs))
    return sum(1 for _ in search_window_semiheaps(w))


# --------------------------------------------------------------------------
# Golden counts

def _golden_path() -> Path:
    override = os.environ.get("EBS_GOLDEN_DIR")
    if override:
        return Path(override) / "window_counts.txt"
    return Path(str(resources.files("ebs") / "golden" / "window_counts.txt"))


def load_golden() -> dict[str, int]:
    """Frozen counts keyed by "HxW" (windows anchored anywhere)."""
    out = {}
    for line in _golden_path().read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            key, value = line.split()
            out[key] = int(value)
    return out


def golden_count(height: int, width: int) -> int | None:
    return load_golden().get(f"{height}x{width}")


# --------------------------------------------------------------------------
# Cross-validation

NONOCCURRING_PREFIX = "nonoccurring("


@dataclass
class CrossValidation:
    window: Window
    pad_factor: int
    count: int = 0
    exact: int = 0
    extensions: int = 0
    failures: list = field(default_factory=list)
    nonoccurrence: list = field(default_factory=list)
    cases: Counter = field(default_factory=Counter)

    @property
    def ok(self) -> bool:
        return not self.failures and not self.nonoccurrence

    @property
    def certified_anchorless(self) -> int:
        """Failures whose closure provably misses its corner point."""
        return sum(f["anchor_exclusion"] is not None for f in self.failures)

    def to_json(self) -> dict:
        return {
            "window": self.window.to_json(),
            "pad_factor": self.pad_factor,
            "count": self.count,
            "exact": self.exact,
            "extensions": self.extensions,
            "failures": self.failures,
            "certified_anchorless": self.certified_anchorless,
            "nonoccurrence_violations": self.nonoccurrence,
            "cases": dict(sorted(self.cases.items())),
        }


def cross_validate(w: Window, pad_factor: int = 4, jobs: int = 1) -> CrossValidation:
    """Classify the padded closure of every window-semiheap of ``w``."""
    count, stream = enumerate_window_semiheaps(w, jobs)
    rep = CrossValidation(w, pad_factor, count)
    for s in stream:
        if not s:
            rep.cases[EMPTY] += 1
            continue
        closed = padded_closure(s, w, pad_factor)
        r = classify(closed)
        rep.cases[r.case] += 1
        if not s.issubset(closed) or not r.ok:
            cert = anchor_exclusion(closed)
            rep.failures.append({"set": s.to_json(), "closure": closed.to_json(),
                                 "report": r.to_json(),
                                 "anchor_exclusion": None if cert is None else list(cert)})
        if r.case not in OCCURRING:
            rep.nonoccurrence.append({"set": s.to_json(), "case": r.case})
        if closed == s:
            rep.exact += 1
        else:
            rep.extensions += 1
    return rep
