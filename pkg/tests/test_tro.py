import json

import numpy as np
import pytest
import scipy.sparse as sp

from ebs.semigroup import DomainError, Element, RangeError, product
from ebs.sets import CornerIdeal, DiagonalChain, ElementSet, Lattice, Singleton, Window
from ebs.tro import (
    BasisIndexer,
    OperatorCombo,
    assemble,
    dense_norm,
    op_norm,
    phi0,
    rep_matrix,
    row_block,
    safe_columns,
    verify_contraction,
    verify_partial_isometry,
)

O = Element(0, 0)


def mapping(x, n):
    op = rep_matrix(x, n)
    ix = op.indexer
    return {ix.label(int(s)): ix.label(int(t)) for s, t in zip(op.sources, op.targets)}


class TestIndexer:
    def test_bijective(self):
        ix = BasisIndexer(2)
        assert [ix.index(*ix.label(k)) for k in range(ix.size)] == list(range(25))
        assert ix.label(0) == (-2, -2) and ix.label(1) == (-2, -1)

    def test_off_grid(self):
        with pytest.raises(RangeError):
            BasisIndexer(2).index(3, 0)


class TestRepMatrix:
    def test_identity_projection(self):
        m = mapping((0, 0), 2)
        assert m == {Element(p, q): Element(p, q) for p in range(0, 3) for q in range(-2, 3)}

    def test_shift_down(self):
        m = mapping((1, 0), 2)
        assert m == {Element(p, q): Element(p + 1, q) for p in range(0, 2) for q in range(-2, 3)}

    def test_shift_up(self):
        m = mapping((0, 1), 2)
        assert m == {Element(p, q): Element(p - 1, q) for p in range(1, 3) for q in range(-2, 3)}

    def test_at_most_one_target(self):
        op = rep_matrix((2, -1), 4)
        assert len(set(op.sources.tolist())) == len(op.sources)

    def test_outside_grid(self):
        with pytest.raises(RangeError):
            rep_matrix((3, 0), 2)

    def test_multiplicative_on_safe_columns(self):
        n = 6
        pts = [Element(i, j) for i in range(-2, 3) for j in range(-2, 3)]
        for x in pts:
            for y in pts:
                mx, my, mxy = mapping(x, n), mapping(y, n), mapping(product(x, y), n)
                for p in range(-n, n + 1):
                    src = Element(p, 0)
                    # exact action, ignoring the grid
                    mid = Element(y.i + p - y.j, 0) if p >= y.j else None
                    end = Element(x.i + mid.i - x.j, 0) if mid and mid.i >= x.j else None
                    path = [e for e in (mid, end) if e is not None]
                    if any(abs(e.i) > n for e in path):
                        continue
                    composed = mx.get(my[src]) if src in my else None
                    assert composed == mxy.get(src) == end


class TestCombos:
    def test_duplicates_rejected(self):
        with pytest.raises(DomainError):
            OperatorCombo(((1, (0, 0)), (1, (0, 0))))

    def test_assemble(self):
        m = assemble([(1, (0, 0))], 1)
        assert np.array_equal(m.diagonal(), np.array([0, 0, 0, 1, 1, 1, 1, 1, 1]))
        z = assemble([], 3)
        assert z.nnz == 0 and op_norm(z).value == 0.0

    def test_row_block_kron(self):
        rng = np.random.default_rng(0)
        n = 4
        terms = [(complex(*rng.uniform(-1, 1, 2)), (i, j)) for i, j in [(0, 0), (1, -1), (-2, 2)]]
        full = assemble(terms, n).toarray()
        R = row_block(terms, n)
        assert np.allclose(full, np.kron(R, np.eye(2 * n + 1)))
        assert op_norm(assemble(terms, n)).value == pytest.approx(op_norm(R).value, rel=1e-7)

    def test_json(self):
        c = OperatorCombo(((1 + 2j, (0, 1)), (-0.5, (3, 3))))
        assert OperatorCombo.from_json(json.loads(json.dumps(c.to_json()))) == c


class TestNorm:
    def test_single_partial_isometry(self):
        for x in [(0, 0), (2, -3), (-4, 1)]:
            est = op_norm(assemble([(1, x)], 8))
            assert est.converged and est.value == pytest.approx(1.0, abs=1e-8)

    def test_sum_of_idempotents(self):
        m = assemble([(1, (0, 0)), (1, (1, 1))], 8)
        assert op_norm(m).value == pytest.approx(dense_norm(m), rel=1e-8)
        assert dense_norm(m) == pytest.approx(2.0)

    def test_random_against_svd(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            m = sp.random(30, 30, density=0.2, random_state=rng) * 3
            assert op_norm(m).value == pytest.approx(dense_norm(m), rel=1e-7)

    def test_deterministic(self):
        m = assemble([(0.3, (0, 1)), (-1j, (2, 0))], 5)
        assert op_norm(m) == op_norm(m)

    def test_nonconvergence_flagged(self):
        m = assemble([(1, (0, 1)), (1, (1, 0)), (0.7, (2, 2))], 10)
        est = op_norm(m, max_iter=2)
        assert not est.converged and est.iterations == 2


class TestPhi0:
    def test_corner(self):
        c = OperatorCombo(((1, (0, 0)), (2, (-1, -1))))
        assert phi0(c, CornerIdeal(0, 0)) == OperatorCombo(((1, (0, 0)),))

    def test_fixed_and_empty(self):
        c = OperatorCombo(((1, (0, 0)), (2, (2, 4))))
        assert phi0(c, CornerIdeal(0, 0)) == c
        assert len(phi0(c, Singleton(Element(5, 5)))) == 0

    def test_idempotent(self):
        rng = np.random.default_rng(1)
        from ebs.tro import random_combo
        k = Lattice(O, 2)
        for _ in range(20):
            c = random_combo(rng, 20)
            assert phi0(phi0(c, k), k) == phi0(c, k)

    def test_element_set(self):
        s = ElementSet.from_members(Window(0, 0, 3, 3), [(1, 1)])
        c = OperatorCombo(((1, (1, 1)), (1, (0, 0))))
        assert phi0(c, s).elements == [(1, 1)]


class TestContraction:
    def test_report_shape(self):
        rep = verify_contraction(CornerIdeal(0, 0), trials=5, n=8, seed=0, reduce=False)
        d = rep.to_json()
        assert d["trials"] == 5 and d["svd_mismatches"] == 0
        assert set(d) >= {"passes", "max_ratio", "failures"}

    def test_reduced_matches_full(self):
        a = verify_contraction(Lattice(O, 2), trials=10, n=8, seed=3, reduce=False)
        b = verify_contraction(Lattice(O, 2), trials=10, n=8, seed=3, reduce=True)
        assert a.passes == b.passes
        assert a.max_ratio == pytest.approx(b.max_ratio, rel=1e-7)

    def test_all_terms_in_k(self):
        rep = verify_contraction(lambda e: True, trials=10, n=10, seed=1)
        assert rep.passes == 10 and rep.max_ratio == pytest.approx(1.0, abs=1e-12)

    def test_singleton(self):
        rep = verify_contraction(Singleton(Element(5, 5)), trials=10, n=20, seed=1)
        assert rep.ok

    def test_seeded(self):
        a = verify_contraction(DiagonalChain(O, (1, 3)), trials=5, n=12, seed=9)
        b = verify_contraction(DiagonalChain(O, (1, 3)), trials=5, n=12, seed=9)
        assert a.to_json() == b.to_json()

    def test_needs_trials(self):
        with pytest.raises(DomainError):
            verify_contraction(CornerIdeal(0, 0), trials=0)


class TestProjectionCounterexamples:
    """Combinations whose projection has a larger norm than the original.

    ``pi(a_{-1,-1}) - 1.5 pi(a_00)`` acts as ``-0.5`` on rows ``p >= 0`` and as
    ``1`` on row ``-1``, so its norm is 1, while dropping the term outside the
    corner leaves ``-1.5 pi(a_00)`` of norm 1.5.  Both terms shift rows by the
    same amount, so their images overlap.
    """

    @pytest.mark.parametrize("k, combo", [
        (CornerIdeal(0, 0), [(1.0, (-1, -1)), (-1.5, (0, 0))]),
        (Singleton(Element(1, 1)), [(1.0, (0, 0)), (-1.5, (1, 1))]),
        (DiagonalChain(O, (1, 3)), [(1.0, (2, 2)), (-1.5, (3, 3))]),
    ])
    def test_norm_increases(self, k, combo):
        for n in (8, 16, 40):
            a = op_norm(assemble(combo, n)).value
            b = op_norm(assemble(phi0(combo, k), n)).value
            assert a == pytest.approx(1.0, abs=1e-7)
            assert b == pytest.approx(1.5, abs=1e-7)

    def test_naive_identity_fails_on_overlap(self):
        from ebs.tro import naive_sum_gap
        assert naive_sum_gap([(1.0, (-1, -1)), (-1.5, (0, 0))], 8) > 1e-3
        assert naive_sum_gap([(1.0, (0, 1)), (2.0, (0, 0))], 8) < 1e-12
        # equal i - j but disjoint supports: rows p >= 3 only for the second
        assert naive_sum_gap([(1.0, (0, 0)), (1.0, (3, 3))], 8) > 1e-3


class TestPartialIsometry:
    def test_examples(self):
        assert verify_partial_isometry((0, 0), 8)
        r = verify_partial_isometry((2, 5), 16)
        assert r.exact and r.safe_columns > 0

    def test_interior_required(self):
        with pytest.raises(DomainError):
            verify_partial_isometry((5, 0), 8)

    def test_safe_columns(self):
        # rows below j are killed exactly; row p >= j is safe iff p + i - j fits
        cols = safe_columns((1, 0), 2)
        ix = BasisIndexer(2)
        rows = sorted({ix.label(int(c)).i for c in cols})
        assert rows == [-2, -1, 0, 1]

    def test_all_small_elements(self):
        for i in range(-4, 5):
            for j in range(-4, 5):
                assert verify_partial_isometry((i, j), 8)
