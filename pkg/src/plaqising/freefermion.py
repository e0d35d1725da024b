"""Free-fermion solution of transverse-field Ising chains.

Chain model
-----------
``H_I = -scale * sum_j (g_I * tx_j + tz_j tz_{j+1})`` on ``L`` sites, the
closing bond present only for periodic chains (with an optional sign twist);
open chains may carry extra single-``tz`` boundary fields, which are outside
the quadratic-fermion form and are rejected here (the dense path in
:mod:`plaqising.duality` covers them).

Fermionization conventions (fixed; every formula below assumes them):

* ``A_j = c_j + c^dag_j``, ``B_j = c_j - c^dag_j``;
* ``tx_j = B_j A_j = 1 - 2 n_j``;
* ``tz_j tz_{j+1} = -B_j A_{j+1}``;
* on a ring, ``tz_L tz_1 = + P * B_L A_1`` with ``P`` the fermion parity, so
  the even-parity (``P = +1``) block maps to antiperiodic fermions
  (momenta ``(2m+1) pi / L``) and the odd block to periodic fermions
  (``2 pi m / L``); a bond twist swaps the two grids.

The single-particle problem reduces to the ``L x L`` real matrix
``Z = 2 h g_I * 1 - 2 h * S`` (``S`` the one-step lower shift, plus the
boundary corner on rings): mode energies are the singular values of ``Z``
and the ground-state Majorana correlator is the orthogonal polar factor
``G(i, j) = <B_i A_j> = (U Vh)^T`` from ``Z = U diag(s) Vh``.  The many-body
ground energy is ``-1/2 sum_k eps_k`` exactly (field constants cancel).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.linalg

from .errors import IndexOutOfRange, InvalidSpec, NumericalFailure
from .lattice import ChainBoundary
from .pauli import PauliString

def _sv_noise_floor(L: int, eps_max: float) -> float:
    """Smallest open-chain mode energy distinguishable from an exact zero mode.

    Mode energies are measured as ``||Z^T u_k||``; for a true (underflowed)
    zero mode the computed norm is pure eigenvector noise,
    ``||Z^T eta|| <~ p(L) * machine_eps * ||Z||``, so anything below this
    floor is replaced by the analytic edge mode.
    """
    return 32.0 * L * np.finfo(float).eps * max(eps_max, 1e-300)


class ParitySector(Enum):
    EVEN = "Even"
    ODD = "Odd"
    OPEN_NA = "OpenNA"


@dataclass(frozen=True)
class TFIMChainSpec:
    """One transverse-field Ising chain (possibly a dual of a 2D lattice).

    ``edge_fields`` is a tuple of ``(position, strength)`` single-``tz``
    boundary terms ``-scale * strength * tz_pos`` (open chains only; produced
    by the 2D duality at lattice boundaries).  ``twist = -1`` flips the sign
    of the closing bond of a periodic chain (sector-resolved duality).
    ``zero_field = True`` marks the degenerate ``h = 0`` dual: the Hamiltonian
    is then just ``-scale * sum tx`` with ``scale`` holding the plaquette
    coupling and ``g_I`` meaningless.
    """

    length: int
    boundary: ChainBoundary
    g_I: float
    scale: float
    edge_fields: tuple[tuple[int, float], ...] = ()
    twist: int = 1
    zero_field: bool = False

    def __post_init__(self):
        if self.length < 1:
            raise InvalidSpec("chain length must be positive")
        if not self.zero_field:
            if self.g_I < 0:
                raise InvalidSpec("g_I must be nonnegative")
            if self.scale <= 0:
                raise InvalidSpec("scale must be positive")
        if self.twist not in (1, -1):
            raise InvalidSpec("twist must be +1 or -1")
        if self.twist == -1 and self.boundary is not ChainBoundary.PERIODIC_CHAIN:
            raise InvalidSpec("twist applies to periodic chains only")
        if self.edge_fields and self.boundary is not ChainBoundary.OPEN_CHAIN:
            raise InvalidSpec("edge fields apply to open chains only")
        for pos, _ in self.edge_fields:
            if not 0 <= pos < self.length:
                raise InvalidSpec(f"edge field position {pos} outside chain")


def chain_terms(spec: TFIMChainSpec) -> list[tuple[float, PauliString]]:
    """Pauli-term list of the chain Hamiltonian (tx = X, tz = Z)."""
    L = spec.length
    terms: list[tuple[float, PauliString]] = []
    if spec.zero_field:
        for j in range(L):
            terms.append((-spec.scale, PauliString(((j, "X"),))))
        return terms
    for j in range(L):
        terms.append((-spec.scale * spec.g_I, PauliString(((j, "X"),))))
    if L > 1:
        nbonds = L if spec.boundary is ChainBoundary.PERIODIC_CHAIN else L - 1
        for j in range(nbonds):
            w = spec.twist if j == L - 1 else 1
            terms.append(
                (-spec.scale * w, PauliString(((j, "Z"), ((j + 1) % L, "Z"))))
            )
    for pos, strength in spec.edge_fields:
        terms.append((-spec.scale * strength, PauliString(((pos, "Z"),))))
    return terms


# ----------------------------------------------------------------------
# BdG solutions
# ----------------------------------------------------------------------
@dataclass
class BdGSolution:
    """Single-particle solution of one chain in its ground parity sector.

    ``energies`` are the mode energies of the ground-sector momentum grid
    (all of them, ascending).  ``G`` is the Majorana correlator
    ``G(i,j) = <B_i A_j>`` of the corresponding Gaussian vacuum; for long
    open chains solved with ``corr_size = m`` only the leading ``m x m``
    block is materialized.  For periodic chains both grids are retained
    (``eps_even``/``eps_odd`` with vacuum energies and parities) so many-body
    levels of both spin-parity blocks can be reconstructed.
    """

    chain: TFIMChainSpec
    energies: np.ndarray
    ground_energy: float
    parity_sector: ParitySector
    _G: np.ndarray | None = None
    _gvec: np.ndarray | None = None  # periodic: G(i, i+r) = _gvec[r mod L] up to wrap sign
    _gvec_wrap_sign: int = -1  # -1 antiperiodic grid, +1 periodic grid
    # periodic bookkeeping (None for open chains)
    eps_even: np.ndarray | None = None   # antiperiodic grid (even spin parity)
    eps_odd: np.ndarray | None = None    # periodic grid (odd spin parity)
    evac_even: float | None = None
    evac_odd: float | None = None
    vacparity_odd_grid: int | None = None

    @property
    def L(self) -> int:
        return self.chain.length

    def corr(self, i: int, j: int) -> float:
        """``<B_i A_j>`` with 0-based indices."""
        if self._gvec is not None:
            r = j - i
            L = self.L
            s = 1.0
            while r >= L:
                r -= L
                s *= self._gvec_wrap_sign
            while r < 0:
                r += L
                s *= self._gvec_wrap_sign
            return float(s * self._gvec[r])
        if self._G is None:
            raise InvalidSpec("correlator block was not materialized")
        if not (0 <= i < self._G.shape[0] and 0 <= j < self._G.shape[1]):
            raise IndexOutOfRange(
                f"G({i},{j}) outside the materialized {self._G.shape} block"
            )
        return float(self._G[i, j])

    @property
    def G(self) -> np.ndarray:
        if self._G is not None:
            return self._G
        L = self.L
        out = np.empty((L, L))
        for i in range(L):
            for j in range(L):
                out[i, j] = self.corr(i, j)
        return out


def _open_Z(L: int, g: float, h: float) -> tuple[np.ndarray, np.ndarray]:
    """Diagonals of Z Z^T for an open chain (tridiagonal) as (diag, offdiag)."""
    d = np.full(L, 4 * h * h * (g * g + 1.0))
    d[0] = 4 * h * h * g * g
    e = np.full(L - 1, -4 * h * h * g)
    return d, e


def _apply_Zt_open(U: np.ndarray, g: float, h: float) -> np.ndarray:
    """Z^T @ U for the open-chain Z (bidiagonal), without forming Z."""
    out = 2 * h * g * U
    out[:-1] -= 2 * h * U[1:]
    return out


def bdg_solve(chain: TFIMChainSpec, corr_size: int | None = None) -> BdGSolution:
    """Solve one chain: mode energies and ground-sector Majorana correlator.

    ``corr_size``: for open chains, materialize only the leading block
    ``G[:m, :m]`` (``m = corr_size``); ``0`` skips the correlator entirely
    (energies only); ``None`` builds the full matrix.  Ignored for periodic
    chains, whose correlator is a one-dimensional momentum sum anyway.
    """
    if chain.zero_field:
        raise InvalidSpec("zero-field chains have no Ising bonds; use dense ED")
    if chain.edge_fields:
        raise InvalidSpec("boundary tz fields break the quadratic form; use dense ED")
    g, h, L = chain.g_I, chain.scale, chain.length

    if L == 1:
        # single spin in a field: levels -h g and +h g
        return BdGSolution(
            chain=chain,
            energies=np.array([2 * h * g]),
            ground_energy=-h * g,
            parity_sector=(
                ParitySector.OPEN_NA
                if chain.boundary is ChainBoundary.OPEN_CHAIN
                else ParitySector.EVEN
            ),
            _G=np.array([[1.0]]),
        )

    if chain.boundary is ChainBoundary.OPEN_CHAIN:
        d, e = _open_Z(L, g, h)
        _, U = scipy.linalg.eigh_tridiagonal(d, e)
        V = _apply_Zt_open(U, g, h)
        # measure each mode energy as ||Z^T u_k||: unlike sqrt of the
        # tridiagonal eigenvalue (absolute error ~ eps * lam_max, i.e. a large
        # RELATIVE error for small modes), the directly computed norm is
        # accurate to ~machine eps relative, which keeps small-but-real edge
        # modes and the orthogonality of G at full precision
        eps = np.linalg.norm(V, axis=0)
        small = eps < _sv_noise_floor(L, float(eps.max()))
        eps = np.where(small, 0.0, eps)
        V /= np.where(small, 1.0, eps)
        if small.any():
            # near-null modes: analytic edge vectors (right null of Z decays
            # from the last site, left null from the first) paired so that
            # u^T Z v >= 0
            jj = np.arange(L)
            with np.errstate(under="ignore"):
                v0 = np.power(g, (L - 1 - jj).astype(float)) if g > 0 else (jj == L - 1).astype(float)
                u0 = np.power(g, jj.astype(float)) if g > 0 else (jj == 0).astype(float)
            v0 /= np.linalg.norm(v0)
            u0 /= np.linalg.norm(u0)
            for idx in np.nonzero(small)[0]:
                U[:, idx] = u0
                sv = float(v0 @ _apply_Zt_open(u0[:, None], g, h)[:, 0])  # = u0^T Z v0
                V[:, idx] = v0 if sv >= 0 else -v0
        suspect = (~small) & (eps < 1e-4 * float(eps.max()))
        for idx in np.nonzero(suspect)[0]:
            # a mode far below the top of the band keeps an amplified share
            # of the eigenvector noise after the 1/eps normalization; its
            # true direction is fixed by orthogonality to the (accurate)
            # rest of the frame, so project that out and renormalize
            others = np.ones(L, dtype=bool)
            others[idx] = False
            w = V[:, idx] - V[:, others] @ (V[:, others].T @ V[:, idx])
            V[:, idx] = w / np.linalg.norm(w)
        if corr_size == 0:
            return BdGSolution(
                chain=chain,
                energies=np.sort(eps),
                ground_energy=-0.5 * float(eps.sum()),
                parity_sector=ParitySector.OPEN_NA,
            )
        G = V @ U.T
        dev = np.abs(G @ G.T - np.eye(L)).max()
        if dev > 1e-8:
            raise NumericalFailure(
                f"Majorana correlator lost orthogonality (deviation {dev:.2e})"
            )
        if corr_size is not None:
            G = np.ascontiguousarray(G[:corr_size, :corr_size])
        return BdGSolution(
            chain=chain,
            energies=np.sort(eps),
            ground_energy=-0.5 * float(eps.sum()),
            parity_sector=ParitySector.OPEN_NA,
            _G=G,
        )

    # periodic chain: antiperiodic grid for the even spin-parity block,
    # periodic grid for the odd block; a twist swaps the two roles.
    k_ap = np.pi * (2 * np.arange(L) + 1) / L
    k_p = 2 * np.pi * np.arange(L) / L
    disp = lambda k: 2 * h * np.sqrt((g - np.cos(k)) ** 2 + np.sin(k) ** 2)
    eps_ap, eps_p = disp(k_ap), disp(k_p)
    evac_ap, evac_p = -0.5 * float(eps_ap.sum()), -0.5 * float(eps_p.sum())
    pvac_p = 1 if g >= 1.0 else -1  # sign of the unpaired k=0 mode energy

    if chain.twist == 1:
        eps_even, evac_even = eps_ap, evac_ap
        eps_odd, evac_odd, pv_odd = eps_p, evac_p, pvac_p
        grid_even = k_ap
    else:
        eps_even, evac_even = eps_p, evac_p
        eps_odd, evac_odd, pv_odd = eps_ap, evac_ap, 1
        grid_even = k_p

    # ground state: even-block vacuum (parity +1 there by construction except
    # for the twisted/periodic-grid case, where an unpaired negative mode may
    # make the vacuum odd and the even ground state costs one extra fermion)
    pvac_even = 1 if chain.twist == 1 else pvac_p
    e_even_gs = evac_even + (0.0 if pvac_even == 1 else float(np.min(eps_even)))
    e_odd_gs = evac_odd + (0.0 if pv_odd == -1 else float(np.min(eps_odd)))
    if e_even_gs <= e_odd_gs:
        sector = ParitySector.EVEN
        ground = e_even_gs
    else:
        sector = ParitySector.ODD
        ground = e_odd_gs

    # Majorana correlator of the even-block vacuum via one inverse FFT:
    # G(i, i+r) = (1/L) sum_k e^{ikr} (g - e^{-ik}) / |g - e^{-ik}|
    z = g - np.exp(-1j * grid_even)
    az = np.abs(z)
    if np.any(az < 1e-15):
        f = np.where(az < 1e-15, 1.0, z / np.where(az < 1e-15, 1.0, az))
    else:
        f = z / az
    base = np.fft.ifft(f)  # index r: (1/L) sum_m e^{2 pi i m r / L} f_m
    phase = np.exp(1j * grid_even[0] * np.arange(L))  # grid_even[0] is the k-offset
    gvec = np.real(phase * base)
    return BdGSolution(
        chain=chain,
        energies=np.sort(eps_even),
        ground_energy=ground,
        parity_sector=sector,
        _gvec=gvec,
        _gvec_wrap_sign=(-1 if chain.twist == 1 else 1),
        eps_even=np.sort(eps_even),
        eps_odd=np.sort(eps_odd),
        evac_even=evac_even,
        evac_odd=evac_odd,
        vacparity_odd_grid=pv_odd,
    )


# ----------------------------------------------------------------------
# many-body levels and gaps
# ----------------------------------------------------------------------
def _sums_by_count_parity(eps: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """All subset sums of ``eps`` split by even/odd subset size."""
    even = np.zeros(1)
    odd = np.zeros(0)
    for e in eps:
        even, odd = (
            np.concatenate([even, odd + e]),
            np.concatenate([odd, even + e]),
        )
    return even, odd


def ring_sector_levels(
    chain: TFIMChainSpec, spin_parity: int
) -> np.ndarray:
    """Every many-body level of one spin-parity block of a ring chain.

    Even spin parity lives on the antiperiodic grid (twist +1) or periodic
    grid (twist -1); odd parity on the other.  Within a grid, a state with
    occupied set S has spin parity ``p_vac * (-1)^{|S|}``.
    """
    if chain.boundary is not ChainBoundary.PERIODIC_CHAIN:
        raise InvalidSpec("sector levels are defined for ring chains")
    if chain.length == 1:
        hg = chain.scale * chain.g_I
        return np.array([-hg]) if spin_parity == 1 else np.array([+hg])
    sol = bdg_solve(chain, corr_size=0)
    if spin_parity == 1:
        eps, evac = sol.eps_even, sol.evac_even
        pvac = 1 if chain.twist == 1 else (1 if chain.g_I >= 1 else -1)
    else:
        eps, evac = sol.eps_odd, sol.evac_odd
        pvac = sol.vacparity_odd_grid
    even_s, odd_s = _sums_by_count_parity(eps)
    sums = even_s if pvac == spin_parity else odd_s
    return np.sort(evac + sums)


def manybody_levels(chain: TFIMChainSpec) -> np.ndarray:
    """Full spin spectrum of the chain reconstructed from the mode energies."""
    if chain.zero_field:
        # free spins in a transverse field: levels -scale * (L - 2k)
        even_s, odd_s = _sums_by_count_parity(np.full(chain.length, 2 * chain.scale))
        return np.sort(-chain.scale * chain.length + np.concatenate([even_s, odd_s]))
    if chain.boundary is ChainBoundary.OPEN_CHAIN:
        sol = bdg_solve(chain, corr_size=0)
        even_s, odd_s = _sums_by_count_parity(sol.energies)
        return np.sort(sol.ground_energy + np.concatenate([even_s, odd_s]))
    return np.sort(
        np.concatenate(
            [ring_sector_levels(chain, +1), ring_sector_levels(chain, -1)]
        )
    )


def _lowest_block_levels(eps: np.ndarray, evac: float, pvac: int, parity: int,
                         nmodes: int = 8) -> np.ndarray:
    """A safe handful of the lowest levels of one parity block."""
    eps = np.sort(eps)[: min(len(eps), nmodes)]
    even_s, odd_s = _sums_by_count_parity(eps)
    sums = even_s if pvac == parity else odd_s
    return evac + np.sort(sums)[:8]


def manybody_gap(chain: TFIMChainSpec, degeneracy_tol: float = 1e-8) -> float:
    """Gap between the chain ground state and the first level above the
    degeneracy band, combining both spin-parity blocks for rings."""
    if chain.zero_field:
        return 2 * chain.scale
    if chain.boundary is ChainBoundary.OPEN_CHAIN:
        sol = bdg_solve(chain, corr_size=0)
        above = sol.energies[sol.energies > degeneracy_tol]
        return float(above[0]) if above.size else 0.0
    if chain.length == 1:
        return 2 * chain.scale * chain.g_I
    sol = bdg_solve(chain, corr_size=0)
    pv_even = 1 if chain.twist == 1 else (1 if chain.g_I >= 1 else -1)
    levels = np.concatenate([
        _lowest_block_levels(sol.eps_even, sol.evac_even, pv_even, +1),
        _lowest_block_levels(sol.eps_odd, sol.evac_odd, sol.vacparity_odd_grid, -1),
    ])
    levels = np.sort(levels)
    e0 = levels[0]
    above = levels[levels > e0 + degeneracy_tol]
    return float(above[0] - e0) if above.size else 0.0


# ----------------------------------------------------------------------
# dispersion / continuum parameters
# ----------------------------------------------------------------------
def dispersion(g_I: float, h: float, k: float, a: float = 1.0) -> float:
    """Mode energy ``E_k = 2h sqrt((g_I - cos ka)^2 + sin^2 ka)``."""
    if h <= 0 or a <= 0:
        raise InvalidSpec("h and a must be positive")
    return 2 * h * math.sqrt((g_I - math.cos(k * a)) ** 2 + math.sin(k * a) ** 2)


@dataclass(frozen=True)
class ContinuumParams:
    m: float
    c: float
    a: float


def continuum_params(g_I: float, h: float, a: float = 1.0) -> ContinuumParams:
    """Low-energy mass and velocity: ``m = (g_I - 1)/(2 h a^2)``, ``c = 2 h a``."""
    if h <= 0 or a <= 0:
        raise InvalidSpec("h and a must be positive")
    return ContinuumParams(m=(g_I - 1.0) / (2 * h * a * a), c=2 * h * a, a=a)


# ----------------------------------------------------------------------
# ground-state correlators (Wick determinants in G)
# ----------------------------------------------------------------------
def _toeplitz_from(sol: BdGSolution, row_offsets, col_offsets) -> np.ndarray:
    out = np.empty((len(row_offsets), len(col_offsets)))
    for a, i in enumerate(row_offsets):
        for b, j in enumerate(col_offsets):
            out[a, b] = sol.corr(i, j)
    return out


def _check_pair(sol: BdGSolution, i: int, j: int) -> None:
    if sol.chain.boundary is ChainBoundary.PERIODIC_CHAIN:
        if not (1 <= i < j and j - i < sol.L):
            raise IndexOutOfRange(
                f"need 1 <= i < j with j - i < L = {sol.L}, got ({i}, {j})"
            )
        return
    if not (1 <= i < j <= sol.L):
        raise IndexOutOfRange(f"need 1 <= i < j <= L = {sol.L}, got ({i}, {j})")


def magnetization_x(sol: BdGSolution, i: int) -> float:
    """``<tx_i>`` (1-based site)."""
    if not 1 <= i <= sol.L:
        raise IndexOutOfRange(f"site {i} outside 1..{sol.L}")
    return sol.corr(i - 1, i - 1)


def zz_correlator(sol: BdGSolution, i: int, j: int) -> float:
    """``<tz_i tz_j>`` (1-based, i < j) via the r x r Wick determinant.

    ``tz_i tz_j = prod_{m=i}^{j-1} (-B_m A_{m+1})``, so the value is
    ``(-1)^r det[ G(i-1+a, i+b) ]_{a,b=0..r-1}`` with ``r = j - i``.  For
    periodic chains this is the even-block vacuum expectation, exact as long
    as the string does not wrap (i.e. for the shorter of the two arcs).
    """
    _check_pair(sol, i, j)
    r = j - i
    rows = [i - 1 + a for a in range(r)]
    cols = [i + b for b in range(r)]
    T = _toeplitz_from(sol, rows, cols)
    sign, logdet = np.linalg.slogdet(T)
    val = 0.0 if sign == 0 else sign * math.exp(logdet)
    return float((-1) ** r * val)


def xx_correlator(sol: BdGSolution, i: int, j: int) -> float:
    """``<tx_i tx_j>`` (1-based, i < j): two-contraction Wick formula."""
    _check_pair(sol, i, j)
    a, b = i - 1, j - 1
    return float(
        sol.corr(a, a) * sol.corr(b, b) - sol.corr(a, b) * sol.corr(b, a)
    )


def disorder_parameter(sol: BdGSolution, r: int, start: int = 1) -> float:
    """``<prod_{j=start..start+r-1} tx_j>``: an r x r block determinant of G.

    The default segment is anchored at the first site.  For periodic chains
    positions past ``L`` wrap (with the grid's boundary sign), so any ``r < L``
    window is allowed.
    """
    if r < 1 or (sol.chain.boundary is ChainBoundary.OPEN_CHAIN
                 and not 1 <= start <= start + r - 1 <= sol.L):
        raise IndexOutOfRange(f"segment [{start}, {start + r - 1}] outside 1..{sol.L}")
    rows = list(range(start - 1, start - 1 + r))
    T = _toeplitz_from(sol, rows, rows)
    sign, logdet = np.linalg.slogdet(T)
    return float(0.0 if sign == 0 else sign * math.exp(logdet))
