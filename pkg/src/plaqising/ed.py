"""Exact diagonalization of Pauli-string Hamiltonians on up to ~20 spins.

The Hamiltonian of the plaquette model is

    H = -g * sum_p F_p  -  h * sum_j sx_j        (g, h >= 0)

with ``F_p`` the four-corner plaquette string (see :mod:`plaqising.lattice`).
Both term families are real in the z basis (each plaquette string carries two
Y factors, so its prefactor is i^2 = -1 times a sign pattern), hence all
state vectors and spectra here are real float64.

Operator application is matrix-free: a Pauli string acts on the basis-state
integer labels by an XOR flip mask plus a popcount sign, vectorized over the
whole state vector.  The iterative path is a Lanczos recursion with full
reorthogonalization and a deterministic start vector.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import (
    DimensionMismatch,
    InvalidSpec,
    NotConverged,
    SiteOutOfRange,
    TooLarge,
)
from .lattice import LatticeSpec, enumerate_plaquettes
from .pauli import PauliString, sigma_x

DENSE_MAX_SPINS = 14       # full_spectrum budget
DENSE_GROUND_SPINS = 12    # ground_spectrum switches to Lanczos above this
LANCZOS_MAX_SPINS = 20
DEGENERACY_TOL = 1e-8      # eigenvalues this close to E0 count as ground space
LANCZOS_RESIDUAL_TOL = 1e-10
_SEED_NOISE = 1e-2         # relative amplitude of the deterministic seed noise
_SEED_STREAM = 0xA5EED


# ----------------------------------------------------------------------
# Hamiltonian terms
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class HamiltonianSpec:
    """Couplings of ``H = -g * sum F - h * sum sx`` on a lattice."""

    lattice: LatticeSpec
    g: float
    h: float

    def __post_init__(self):
        if self.g < 0 or self.h < 0:
            raise InvalidSpec("couplings g, h must be nonnegative magnitudes")
        if self.g + self.h == 0:
            raise InvalidSpec("g + h must be positive")

    @property
    def n_spins(self) -> int:
        return self.lattice.n_sites


def hamiltonian_terms(hs: HamiltonianSpec) -> list[tuple[float, PauliString]]:
    """``H = sum_k coeff_k * P_k`` with real coefficients and real strings."""
    terms: list[tuple[float, PauliString]] = []
    if hs.g != 0.0:
        for p in enumerate_plaquettes(hs.lattice):
            terms.append((-hs.g, p.operator()))
    if hs.h != 0.0:
        for j in range(hs.lattice.n_sites):
            terms.append((-hs.h, sigma_x(j)))
    return terms


# ----------------------------------------------------------------------
# matrix-free application
# ----------------------------------------------------------------------
def apply_pauli_string(ps: PauliString, v: np.ndarray) -> np.ndarray:
    """Apply one Pauli string to a state vector (new array, input untouched)."""
    v = np.asarray(v)
    dim = v.shape[0]
    n = dim.bit_length() - 1
    if dim != 1 << n:
        raise DimensionMismatch(f"state length {dim} is not a power of two")
    flip, sign_mask, pref = ps.masks()
    if ps.factors and max(s for s, _ in ps.factors) >= n:
        raise SiteOutOfRange(
            f"operator touches site {max(s for s, _ in ps.factors)} "
            f"but the state has only {n} spins"
        )
    ids = np.arange(dim, dtype=np.uint64)
    perm = ids ^ np.uint64(flip)
    signs = 1.0 - 2.0 * (np.bitwise_count(perm & np.uint64(sign_mask)) & np.uint64(1)).astype(np.float64)
    if pref.imag == 0.0 and not np.iscomplexobj(v):
        return pref.real * signs * v[perm]
    return pref * signs * v[perm]


class HamiltonianOperator:
    """Precompiled matrix-free ``H`` for repeated matvecs.

    Each term is stored as a permutation (XOR by the flip mask) plus a signed
    weight vector, so one matvec is ``sum_k w_k[perm] * v[perm]`` — no
    complex arithmetic is ever needed for this model.
    """

    def __init__(self, hs: HamiltonianSpec):
        self.spec = hs
        self._compile(hs.n_spins, hamiltonian_terms(hs))

    @classmethod
    def from_terms(
        cls, n: int, terms: list[tuple[float, PauliString]]
    ) -> "HamiltonianOperator":
        """Operator for an arbitrary real symmetric Pauli-term sum."""
        op = cls.__new__(cls)
        op.spec = None
        op._compile(n, terms)
        return op

    def _compile(self, n: int, terms: list[tuple[float, PauliString]]) -> None:
        self.n = n
        self.dim = 1 << n
        ids = np.arange(self.dim, dtype=np.uint64)
        self._applied: list[tuple[np.ndarray, np.ndarray]] = []
        for coeff, ps in terms:
            flip, sign_mask, pref = ps.masks()
            if pref.imag != 0.0:
                raise InvalidSpec("model terms must be real in the z basis")
            perm = ids ^ np.uint64(flip)
            signs = 1.0 - 2.0 * (
                np.bitwise_count(ids & np.uint64(sign_mask)) & np.uint64(1)
            ).astype(np.float64)
            self._applied.append((perm, coeff * pref.real * signs))

    def matvec(self, v: np.ndarray) -> np.ndarray:
        if v.shape[0] != self.dim:
            raise DimensionMismatch(
                f"state length {v.shape[0]} != 2^{self.n} = {self.dim}"
            )
        out = np.zeros_like(v)
        for perm, w in self._applied:
            out += (w * v)[perm]
        return out

    def dense(self) -> np.ndarray:
        """Materialize H as a dense symmetric float64 matrix."""
        H = np.zeros((self.dim, self.dim))
        ids = np.arange(self.dim, dtype=np.uint64)
        for perm, w in self._applied:
            H[perm, ids] += w
        return H


def apply_hamiltonian(hs: HamiltonianSpec, v: np.ndarray) -> np.ndarray:
    """One-shot ``H @ v``; build a :class:`HamiltonianOperator` for loops."""
    return HamiltonianOperator(hs).matvec(np.asarray(v, dtype=np.float64))


# ----------------------------------------------------------------------
# spectra
# ----------------------------------------------------------------------
@dataclass
class SpectrumResult:
    eigenvalues: np.ndarray
    ground_energy: float
    gap: float
    eigenvectors: np.ndarray | None = None  # columns match eigenvalues
    info: dict = field(default_factory=dict)


def gap_from_levels(levels: np.ndarray, tol: float = DEGENERACY_TOL) -> float:
    """First level strictly above the ground band, minus E0.

    Levels within ``tol`` of E0 belong to the (near-degenerate) ground space
    and do not count as the gap.  Returns 0.0 if every supplied level is in
    the band (caller should then ask for more levels).
    """
    levels = np.sort(np.asarray(levels, dtype=np.float64))
    e0 = levels[0]
    above = levels[levels > e0 + tol]
    return float(above[0] - e0) if above.size else 0.0


def _lanczos_seed(dim: int) -> np.ndarray:
    """Deterministic start vector: uniform plus a small fixed-stream noise.

    A plain uniform vector is an exact eigenvector of every conserved
    sx-product of the model and floating-point matvecs keep it exactly inside
    that symmetry sector, which hides all sector-crossing levels (including
    the physical gap on tori).  The fixed-stream perturbation gives the seed
    weight in every sector while keeping runs bit-reproducible.
    """
    rng = np.random.Generator(np.random.PCG64(_SEED_STREAM))
    v = np.ones(dim) + _SEED_NOISE * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def _lanczos(
    op: HamiltonianOperator,
    k: int,
    want_vectors: bool,
    residual_tol: float = LANCZOS_RESIDUAL_TOL,
    max_iter: int | None = None,
):
    dim = op.dim
    if max_iter is None:
        max_iter = min(dim, max(220, 24 * k))
    V = np.empty((max_iter, dim))
    alphas: list[float] = []
    betas: list[float] = []
    V[0] = _lanczos_seed(dim)
    inject = 0
    ritz = None
    for j in range(max_iter):
        w = op.matvec(V[j])
        if j > 0:
            w -= betas[-1] * V[j - 1]
        a = float(V[j] @ w)
        alphas.append(a)
        w -= a * V[j]
        # full reorthogonalization, twice for float safety
        for _ in range(2):
            w -= V[: j + 1].T @ (V[: j + 1] @ w)
        b = float(np.linalg.norm(w))

        m = j + 1
        if m >= k:
            T_d = np.array(alphas)
            T_e = np.array(betas)
            theta, s = scipy.linalg.eigh_tridiagonal(T_d, T_e)
            # residual bound per Ritz pair: beta_m * |last row of s|
            res = b * np.abs(s[-1, :k])
            ritz = (theta, s)
            if np.all(res <= residual_tol * np.maximum(1.0, np.abs(theta[:k]))):
                break
        if b < 1e-13:
            # Krylov space exhausted an invariant subspace; continue with a
            # deterministic fresh direction orthogonal to everything so far
            inject += 1
            e = np.zeros(dim)
            e[(2654435761 * (j + inject)) % dim] = 1.0
            for _ in range(2):
                e -= V[: j + 1].T @ (V[: j + 1] @ e)
            nrm = np.linalg.norm(e)
            if nrm < 1e-8:
                break  # space truly exhausted
            w = e
            b = 1.0
            betas.append(0.0)
            if j + 1 < max_iter:
                V[j + 1] = w / np.linalg.norm(w)
            continue
        betas.append(b)
        if j + 1 >= max_iter:
            break
        V[j + 1] = w / b
    else:  # pragma: no cover
        pass

    theta, s = ritz if ritz is not None else scipy.linalg.eigh_tridiagonal(
        np.array(alphas), np.array(betas[: len(alphas) - 1])
    )
    m = len(alphas)
    last_beta = betas[m - 1] if len(betas) >= m else 0.0
    res = abs(last_beta) * np.abs(s[-1, :k])
    ok = np.all(res <= residual_tol * np.maximum(1.0, np.abs(theta[:k])))
    if not ok:
        raise NotConverged(
            f"Lanczos did not converge {k} eigenpairs in {m} iterations",
            diagnostics={
                "iterations": m,
                "residuals": res.tolist(),
                "ritz_values": theta[:k].tolist(),
                "injections": inject,
            },
        )
    vals = theta[:k]
    vecs = None
    if want_vectors:
        vecs = V[:m].T @ s[:, :k]
        vecs /= np.linalg.norm(vecs, axis=0)
    info = {"method": "lanczos", "iterations": m, "injections": inject}
    return vals, vecs, info


def ground_spectrum(
    hs: HamiltonianSpec, k: int = 2, want_vectors: bool = False
) -> SpectrumResult:
    """Lowest ``k`` eigenvalues (dense below 13 spins, Lanczos up to 20).

    The gap is degeneracy-tolerant: levels within 1e-8 of E0 are treated as
    one ground band (on tori the topological ground multiplet splits only
    exponentially and must not pollute the gap).
    """
    if k < 1:
        raise InvalidSpec("k must be >= 1")
    n = hs.n_spins
    if n > LANCZOS_MAX_SPINS:
        raise TooLarge(f"{n} spins exceeds the {LANCZOS_MAX_SPINS}-spin budget")
    return operator_ground_spectrum(HamiltonianOperator(hs), k, want_vectors)


def operator_ground_spectrum(
    op: HamiltonianOperator, k: int = 2, want_vectors: bool = False
) -> SpectrumResult:
    """Lowest ``k`` eigenpairs of a precompiled operator (dense or Lanczos)."""
    if k < 1:
        raise InvalidSpec("k must be >= 1")
    if op.n > LANCZOS_MAX_SPINS:
        raise TooLarge(f"{op.n} spins exceeds the {LANCZOS_MAX_SPINS}-spin budget")
    if op.n <= DENSE_GROUND_SPINS:
        H = op.dense()
        if want_vectors:
            vals, vecs = scipy.linalg.eigh(H)
            vals, vecs = vals[:k], vecs[:, :k]
        else:
            vals = scipy.linalg.eigh(H, eigvals_only=True)[:k]
            vecs = None
        info = {"method": "dense"}
    else:
        vals, vecs, info = _lanczos(op, k, want_vectors)
    return SpectrumResult(
        eigenvalues=np.asarray(vals),
        ground_energy=float(vals[0]),
        gap=gap_from_levels(vals),
        eigenvectors=vecs,
        info=info,
    )


def full_spectrum(hs: HamiltonianSpec) -> SpectrumResult:
    """All 2^n eigenvalues by a dense solve (n <= 14)."""
    n = hs.n_spins
    if n > DENSE_MAX_SPINS:
        raise TooLarge(f"{n} spins exceeds the {DENSE_MAX_SPINS}-spin dense budget")
    H = HamiltonianOperator(hs).dense()
    vals = scipy.linalg.eigh(H, eigvals_only=True)
    return SpectrumResult(
        eigenvalues=vals,
        ground_energy=float(vals[0]),
        gap=gap_from_levels(vals),
        info={"method": "dense"},
    )


# ----------------------------------------------------------------------
# generic dense helper for arbitrary real Pauli-term Hamiltonians
# (used by the duality module for the 1D chains)
# ----------------------------------------------------------------------
def dense_matrix_from_terms(
    n: int, terms: list[tuple[float, PauliString]]
) -> np.ndarray:
    dim = 1 << n
    if n > DENSE_MAX_SPINS:
        raise TooLarge(f"{n} spins exceeds the {DENSE_MAX_SPINS}-spin dense budget")
    H = np.zeros((dim, dim))
    ids = np.arange(dim, dtype=np.uint64)
    for coeff, ps in terms:
        flip, sign_mask, pref = ps.masks()
        if pref.imag != 0.0:
            raise InvalidSpec("dense helper expects real terms")
        perm = ids ^ np.uint64(flip)
        signs = 1.0 - 2.0 * (
            np.bitwise_count(ids & np.uint64(sign_mask)) & np.uint64(1)
        ).astype(np.float64)
        H[perm, ids] += coeff * pref.real * signs
    return H


def expectation(v: np.ndarray, ps: PauliString) -> complex:
    """``<v|P|v>`` for a normalized state."""
    w = apply_pauli_string(ps, v)
    return complex(np.vdot(v, w))
