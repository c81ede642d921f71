import json
import math

import numpy as np
import pytest

from ebs.classify import (
    EMPTY,
    INF,
    ClassificationReport,
    Parameters,
    adjoint_label,
    anchor_exclusion,
    canonical,
    case_label,
    classify,
    compute_parameters,
    refined_case,
)
from ebs.semigroup import DomainError, Element, triple
from ebs.sets import (
    ChainPlusLattice,
    ChainPlusLatticeUnion,
    DiagonalChain,
    ElementSet,
    Lattice,
    LatticeUnion,
    Singleton,
    Window,
    closure,
    is_window_semiheap,
    padded_closure,
)

O = Element(0, 0)


def square(n, a=0, b=0):
    return Window(a, b, n, n)


class TestParameters:
    def test_lattice(self):
        p = compute_parameters(Lattice(O, 3).materialize(square(12)))
        assert (p.alpha0, p.beta0, p.beta_bar, p.alpha_bar, p.gamma_bar) == (0, 0, INF, INF, INF)

    def test_singleton(self):
        p = compute_parameters(ElementSet.from_members(square(10), [(2, 5)]))
        assert (p.alpha0, p.beta0, p.beta_bar, p.alpha_bar, p.gamma_bar) == (2, 5, 5, 2, 0)

    def test_chain(self):
        p = compute_parameters(ElementSet.from_members(square(10), [(0, 0), (1, 1), (3, 3)]))
        assert (p.beta_bar, p.alpha_bar, p.gamma_bar) == (0, 0, 3)
        assert case_label(p) == "1.1.2"

    def test_empty(self):
        with pytest.raises(DomainError):
            compute_parameters(ElementSet(square(3)))

    def test_json(self):
        p = Parameters(0, 1, INF, 3, None)
        d = json.loads(json.dumps(p.to_json()))
        assert d["beta_bar"] == "INF"
        assert Parameters.from_json(d) == p


class TestClassify:
    def test_lattice_from_closure(self):
        r = classify(padded_closure([(0, 0), (0, 3)], square(12), 3))
        assert r.case == "3.3.3-(13)"
        assert r.family == Lattice(O, 3)

    def test_lattice_union(self):
        r = classify(LatticeUnion(O, 3, (0, 1)).materialize(square(12)))
        assert r.case == "3.3.3-(12)"
        assert r.family == LatticeUnion(O, 3, (0, 1))

    def test_finite_chain(self):
        r = classify(ElementSet.from_members(square(10), [(0, 0), (1, 1), (3, 3)]))
        assert r.case == "1.1.2"
        assert r.family == DiagonalChain(O, (1, 3))

    def test_singleton(self):
        r = classify(ElementSet.from_members(square(6), [(4, 4)]))
        assert r.case == "1.1.1" and r.family == Singleton(Element(4, 4))

    def test_chain_plus_lattice(self):
        w = square(14)
        s = ElementSet.from_members(w, [(0, 0), (1, 1)] + list(Lattice(Element(3, 3), 2).materialize(w)))
        assert closure(list(s), w) == s
        r = classify(s)
        assert r.case == "1.1.3"
        assert r.family == ChainPlusLattice(O, (1,), 3, 2)

    def test_chain_plus_lattice_union(self):
        f = ChainPlusLatticeUnion(O, (2,), (3, 4), 3)
        r = classify(f.materialize(square(18)))
        assert r.case == "1.1.3" and r.family == f

    def test_empty(self):
        r = classify(ElementSet(square(3)))
        assert r.case == EMPTY and r.ok and r.family is None

    def test_rematerializes(self):
        rng = np.random.default_rng(2)
        w = square(7)
        for _ in range(60):
            gens = [tuple(int(v) for v in rng.integers(0, 7, 2)) for _ in range(rng.integers(1, 4))]
            s = padded_closure(gens, w, 3)
            r = classify(s)
            if r.family is not None:
                assert r.family.materialize(w) == s

    def test_report_json(self):
        for s in (LatticeUnion(O, 3, (0, 1)).materialize(square(12)),
                  ElementSet.from_members(square(5), [(0, 1), (1, 0)])):
            r = classify(s)
            back = ClassificationReport.from_json(json.loads(json.dumps(r.to_json())))
            assert back == r


class TestLabels:
    def test_refined_cases_partition(self):
        for p in range(1, 5):
            for q in range(1, 5):
                for r in range(1, 5):
                    k = refined_case(p, q, r)
                    assert 1 <= k <= 13
                    # transposition exchanges p and r
                    assert adjoint_label(f"3.3.3-({k})") == f"3.3.3-({refined_case(r, q, p)})"

    def test_adjoint_label(self):
        assert adjoint_label("1.1.2") == "1.1.2"
        assert adjoint_label("nonoccurring(2.3.1)") == "nonoccurring(3.2.1)"
        assert adjoint_label(EMPTY) == EMPTY

    def test_translation_invariance(self):
        f = ChainPlusLattice(O, (1,), 3, 2)
        s = f.materialize(square(12))
        r = classify(s)
        r2 = classify(s.translate(4, -7))
        assert r2.case == r.case and r2.family == f.translate(4, -7)


class TestCanonical:
    def test_forms(self):
        assert canonical(DiagonalChain(O)) == Singleton(O)
        assert canonical(LatticeUnion(O, 3, (1,))) == Lattice(Element(1, 1), 3)
        assert canonical(LatticeUnion(O, 4, (1, 3))) == LatticeUnion(Element(1, 1), 4, (0, 2))
        assert canonical(ChainPlusLatticeUnion(O, (), (2,), 2)) == ChainPlusLattice(O, (), 2, 2)

    def test_same_set(self):
        w = square(12)
        for f in (LatticeUnion(O, 4, (1, 3)), DiagonalChain(O)):
            assert canonical(f).materialize(w) == f.materialize(w)


class TestAnchorlessSubsemiheaps:
    """Quadrant subsemiheaps that miss their corner point.

    ``d(i, j) = i - j`` turns the triple product into ``d(x) - d(y) + d(z)``,
    so residue classes of ``d`` are closed.  These sets fall outside every
    anchored family and the classifier reports them as non-occurring.
    """

    @staticmethod
    def residue_class(m, c, n):
        return [(i, j) for i in range(n) for j in range(n) if (i - j - c) % m == 0]

    @pytest.mark.parametrize("m, c", [(2, 1), (3, 1), (3, 2), (5, 3)])
    def test_residue_classes_are_closed(self, m, c):
        members = self.residue_class(m, c, 10)
        s = set(members)
        for x in members:
            for y in members:
                for z in members:
                    t = triple(x, y, z)[0]
                    assert (t[0] - t[1] - c) % m == 0
                    assert t in s or max(t) >= 10

    def test_checkerboard_is_reported(self):
        w = square(6)
        s = padded_closure([(0, 1), (1, 0)], w, 4)
        assert set(s) == set(self.residue_class(2, 1, 6))
        assert anchor_exclusion(s) == (2, 1)
        r = classify(s)
        assert r.family is None and not r.ok
        assert r.case == "nonoccurring(3.3.1)"
        assert r.witness == (O,)

    def test_two_coset_lattice(self):
        # closure of {(0,p), (r,0)}: period p + r lattices based at both points
        p, r = 3, 1
        w = square(16)
        s = padded_closure([(0, p), (r, 0)], w, 3)
        want = {(i, j) for i, j in w.cells()
                if (i % 4, j % 4) in ((0, 3), (1, 0))}
        assert set(s) == want
        assert anchor_exclusion(s) == (4, 1)
        assert classify(s).case.startswith("nonoccurring(")

    def test_anchored_sets_have_no_certificate(self):
        assert anchor_exclusion(Lattice(O, 2).materialize(square(6))) is None
        assert anchor_exclusion(ElementSet(square(2))) is None
