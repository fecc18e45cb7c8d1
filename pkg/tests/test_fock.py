import numpy as np
import pytest

from contmeas import (DimensionMismatchError, SystemOperator, TruncatedSpace,
                      guard_band_leakage, ladder_a, ladder_a_dag, ladder_b,
                      ladder_b_dag, number_a, number_b)


def test_index_unravel_roundtrip():
    sp = TruncatedSpace(5, 3)
    assert sp.dim == 24
    seen = set()
    for n in range(6):
        for m in range(4):
            idx = sp.index(n, m)
            assert sp.unravel(idx) == (n, m)
            seen.add(idx)
    assert seen == set(range(sp.dim))


def test_basis_vector():
    sp = TruncatedSpace(2, 2)
    v = sp.basis_vector(1, 2)
    assert v[sp.index(1, 2)] == 1.0
    assert np.sum(np.abs(v)) == 1.0


def test_ladder_entries():
    sp = TruncatedSpace(4, 3)
    a = ladder_a(sp)
    # a |n, m> = sqrt(n) |n-1, m>
    v = a.apply_to_vector(sp.basis_vector(3, 1))
    assert v[sp.index(2, 1)] == pytest.approx(np.sqrt(3))
    assert np.count_nonzero(v) == 1
    b = ladder_b(sp)
    w = b.apply_to_vector(sp.basis_vector(0, 3))
    assert w[sp.index(0, 2)] == pytest.approx(np.sqrt(3))


def test_raising_drops_top_row():
    sp = TruncatedSpace(3, 2)
    ad = ladder_a_dag(sp)
    assert np.all(ad.apply_to_vector(sp.basis_vector(3, 1)) == 0)
    bd = ladder_b_dag(sp)
    assert np.all(bd.apply_to_vector(sp.basis_vector(0, 2)) == 0)


def test_commutator_on_interior():
    sp = TruncatedSpace(6, 5)
    a, ad = ladder_a(sp), ladder_a_dag(sp)
    comm = a.commutator(ad).to_dense()
    for n in range(6):       # identity except on the top ladder rung
        for m in range(6):
            idx = sp.index(n, m)
            assert comm[idx, idx] == pytest.approx(1.0)


def test_number_operators():
    sp = TruncatedSpace(3, 3)
    na = number_a(sp).to_dense()
    nb = number_b(sp).to_dense()
    for n in range(4):
        for m in range(4):
            idx = sp.index(n, m)
            assert na[idx, idx] == n
            assert nb[idx, idx] == m


def test_adjoint_matches_dense():
    sp = TruncatedSpace(3, 2)
    a = ladder_a(sp)
    assert np.max(np.abs(a.adjoint().to_dense() - a.to_dense().conj().T)) == 0


def test_density_applications_match_dense():
    rng = np.random.default_rng(3)
    sp = TruncatedSpace(3, 3)
    X = ladder_a(sp) + 0.3j * ladder_b_dag(sp)
    rho = rng.standard_normal((sp.dim, sp.dim)) \
        + 1j * rng.standard_normal((sp.dim, sp.dim))
    Xd = X.to_dense()
    assert np.allclose(X.apply_to_density_left(rho), Xd @ rho, atol=1e-14)
    assert np.allclose(X.apply_to_density_right(rho), rho @ Xd, atol=1e-14)


def test_algebra_operators():
    sp = TruncatedSpace(2, 2)
    a, b = ladder_a(sp), ladder_b(sp)
    combo = (2.0 * a - b @ a + (-a)).to_dense()
    ref = 2.0 * a.to_dense() - b.to_dense() @ a.to_dense() - a.to_dense()
    assert np.allclose(combo, ref, atol=1e-15)


def test_space_mismatch_raises():
    a1 = ladder_a(TruncatedSpace(2, 2))
    a2 = ladder_a(TruncatedSpace(3, 2))
    with pytest.raises(DimensionMismatchError):
        a1 + a2
    with pytest.raises(DimensionMismatchError):
        a1.apply_to_vector(np.zeros(16))


def test_from_entries_and_entry():
    sp = TruncatedSpace(2, 1)
    op = SystemOperator.from_entries(sp, {(0, 1): 2.5j, (3, 3): -1.0})
    assert op.entry(0, 1) == 2.5j
    assert op.entry(3, 3) == -1.0
    assert op.entry(1, 0) == 0.0
    assert op.nnz == 2


def test_guard_band_leakage():
    sp = TruncatedSpace(4, 4)
    rho = np.zeros((sp.dim, sp.dim), dtype=complex)
    rho[sp.index(0, 0), sp.index(0, 0)] = 0.9
    rho[sp.index(4, 0), sp.index(4, 0)] = 0.06     # in the band (n side)
    rho[sp.index(1, 3), sp.index(1, 3)] = 0.04     # in the band (m side)
    assert guard_band_leakage(sp, rho, guard=2) == pytest.approx(0.10)
    assert guard_band_leakage(sp, rho, guard=0) == 0.0
