"""Exact diagonalization layer: operator kernels, invariants, spectra.

The algebraic invariants here (hermiticity, commutation, involution) are held
to 1e-10; spectral comparisons against independent constructions to 1e-8.
"""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from plaqising import (
    Boundary,
    HamiltonianSpec,
    LatticeSpec,
    PauliString,
    TooLarge,
    apply_hamiltonian,
    apply_pauli_string,
    diagonal_loop_operator,
    enumerate_plaquettes,
    expectation,
    full_spectrum,
    ground_spectrum,
    hamiltonian_terms,
)
from plaqising.ed import (
    HamiltonianOperator,
    dense_matrix_from_terms,
    gap_from_levels,
    operator_ground_spectrum,
)
from plaqising.errors import InvalidSpec
from plaqising.lattice import site_diagonals


def torus33(g=1.0, h=1.0):
    return HamiltonianSpec(LatticeSpec(3, 3, Boundary.PERIODIC), g, h)


def test_term_count_and_coefficients():
    hs = torus33(g=0.7, h=0.3)
    terms = hamiltonian_terms(hs)
    assert len(terms) == 9 + 9
    coeffs = sorted({round(c, 12) for c, _ in terms})
    assert coeffs == [-0.7, -0.3]


def test_negative_couplings_rejected():
    with pytest.raises(InvalidSpec):
        HamiltonianSpec(LatticeSpec(3, 3, Boundary.PERIODIC), -1.0, 1.0)


def test_hamiltonian_matrix_is_real_and_symmetric():
    H = HamiltonianOperator(torus33(0.8, 1.3)).dense()
    assert H.dtype == np.float64
    assert np.max(np.abs(H - H.T)) < 1e-10


def test_plaquette_operators_are_real_in_z_basis():
    spec = LatticeSpec(3, 3, Boundary.PERIODIC)
    for p in enumerate_plaquettes(spec):
        _, _, pref = p.operator().masks()
        assert abs(pref.imag) < 1e-14


def test_involutions_and_commutation():
    spec = LatticeSpec(3, 3, Boundary.PERIODIC)
    plaqs = [p.operator() for p in enumerate_plaquettes(spec)]
    loops = [diagonal_loop_operator(spec, b) for b in range(len(site_diagonals(spec)))]
    for op in plaqs + loops:
        sq = op * op
        assert sq.is_identity and sq.phase == 1
    for i, a in enumerate(plaqs):
        for b in plaqs[i + 1:]:
            assert a.commutes_with(b)
    for W in loops:
        for a in plaqs:
            assert W.commutes_with(a)


def test_conserved_loops_commute_with_dense_hamiltonian():
    hs = torus33(0.6, 1.1)
    spec = hs.lattice
    H = HamiltonianOperator(hs).dense()
    for b in range(3):
        W = dense_matrix_from_terms(
            hs.n_spins, [(1.0, diagonal_loop_operator(spec, b))]
        )
        assert np.max(np.abs(H @ W - W @ H)) < 1e-10


def _kron_matrix(ps: PauliString, n: int) -> np.ndarray:
    mats = {
        "X": np.array([[0, 1], [1, 0]], dtype=complex),
        "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
        "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    }
    out = np.eye(1, dtype=complex)
    lookup = dict(ps.factors)
    for j in range(n):
        m = mats.get(lookup.get(j), np.eye(2, dtype=complex))
        out = np.kron(m, out)  # site j acts on bit j (fastest-varying)
    return ps.phase * out


@given(st.integers(min_value=0, max_value=10_000))
def test_apply_pauli_string_matches_kron(seed):
    rng = np.random.default_rng(seed)
    n = 5
    ps = PauliString(tuple(
        (int(s), ax) for s, ax in zip(rng.integers(0, n, 3), "XYZ")
    ))
    v = rng.standard_normal(2**n) + 1j * rng.standard_normal(2**n)
    np.testing.assert_allclose(
        apply_pauli_string(ps, v), _kron_matrix(ps, n) @ v, atol=1e-12
    )


def test_apply_hamiltonian_matches_dense():
    hs = torus33(1.2, 0.4)
    rng = np.random.default_rng(7)
    v = rng.standard_normal(2**9)
    H = HamiltonianOperator(hs).dense()
    np.testing.assert_allclose(apply_hamiltonian(hs, v), H @ v, atol=1e-10)


def test_field_only_spectrum_is_analytic():
    # g = 0: H = -h sum sx, levels -h(n - 2k) with binomial multiplicity
    from math import comb

    hs = torus33(g=0.0, h=0.5)
    res = full_spectrum(hs)
    expect = np.sort([-0.5 * (9 - 2 * k) for k in range(10) for _ in range(comb(9, k))])
    np.testing.assert_allclose(res.eigenvalues, expect, atol=1e-10)


def test_plaquette_only_spectrum_on_open_lattice():
    # h = 0 on an open 3x3: the four plaquette operators are independent,
    # so levels are -g * (sum of four signs), each 2^5-fold degenerate
    hs = HamiltonianSpec(LatticeSpec(3, 3, Boundary.OPEN), 1.0, 0.0)
    res = full_spectrum(hs)
    from collections import Counter
    counts = Counter(np.round(res.eigenvalues, 9))
    assert counts == Counter({
        -4.0: 32, -2.0: 4 * 32, 0.0: 6 * 32, 2.0: 4 * 32, 4.0: 32,
    })


def test_ground_spectrum_matches_dense_head():
    hs = torus33(0.9, 1.0)
    res_full = full_spectrum(hs)
    res = ground_spectrum(hs, k=3)
    np.testing.assert_allclose(res.eigenvalues[0], res_full.eigenvalues[0], atol=1e-9)
    assert abs(res.gap - res_full.gap) < 1e-8


def test_lanczos_branch_agrees_with_dense():
    # 4x3 torus = 12 spins: dense is still exact, and forcing the iterative
    # path through the raw operator must reproduce it
    hs = HamiltonianSpec(LatticeSpec(4, 3, Boundary.PERIODIC), 1.0, 1.0)
    dense_levels = full_spectrum(hs).eigenvalues
    op = HamiltonianOperator(hs)
    from plaqising.ed import _lanczos

    vals, _, info = _lanczos(op, k=4, want_vectors=False)
    assert info["method"] == "lanczos"
    np.testing.assert_allclose(vals[0], dense_levels[0], atol=1e-9)


def test_budget_guards():
    big = HamiltonianSpec(LatticeSpec(5, 4, Boundary.PERIODIC), 1.0, 1.0)
    with pytest.raises(TooLarge):
        full_spectrum(big)
    huge = HamiltonianSpec(LatticeSpec(7, 4, Boundary.PERIODIC), 1.0, 1.0)
    with pytest.raises(TooLarge):
        ground_spectrum(huge)


def test_gap_from_levels_collapses_degeneracy():
    levels = np.array([0.0, 1e-12, 1e-12, 0.5, 0.5, 1.0])
    assert abs(gap_from_levels(levels) - 0.5) < 1e-15
    only_ground = np.array([1.0, 1.0 + 1e-13])
    assert gap_from_levels(only_ground) == 0.0


def test_expectation_on_product_state():
    # |+...+>: every sx gives 1, any string with a Y or Z gives 0
    n = 4
    v = np.full(2**n, 2.0 ** (-n / 2))
    assert abs(expectation(v, PauliString(((2, "X"),))) - 1.0) < 1e-12
    assert abs(expectation(v, PauliString(((1, "Z"),)))) < 1e-12
    assert abs(expectation(v, PauliString(((0, "X"), (3, "Y"))))) < 1e-12


def test_operator_ground_spectrum_from_custom_terms():
    # two-level check: H = -sz on one spin
    op = HamiltonianOperator.from_terms(1, [(-1.0, PauliString(((0, "Z"),)))])
    res = operator_ground_spectrum(op, k=2)
    np.testing.assert_allclose(res.eigenvalues[:2], [-1.0, 1.0], atol=1e-12)
