"""Classical ground truth for the bond-fermion models.

Everything here is circuit-free: momentum-sum correlators, brute-force BCS
vacua, entanglement at sizes far beyond statevectors, and exact
diagonalization of the spin Hamiltonians on small clusters.

Grid conventions: correlator sums run over the momentum multiset they are
given and normalize by its length, so the particle-hole doubled grids from
momentum_grid and plain half-integer base grids give identical answers for
the (particle-hole even) physical correlators. Finite-size scans use unshifted
half-integer grids at any size; the power-of-two restriction applies only to
circuit-facing grids.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from .kitaev_models import ModelParams, bloch, half_integer_grid, spin_hamiltonian
from .observables import EntanglementResult, spectrum_entropy
from .sv_core import InvariantViolation

ORACLE_CLAMP = 1e-9


@dataclass
class ExactCorrelators:
    """Translation-invariant bilinears as functions of mode positions.

    Built from a momentum multiset; all four are even under k -> -k on
    particle-hole closed grids, and sums normalize by the multiset length.
    """

    grid: np.ndarray
    theta: np.ndarray

    @property
    def n_k(self) -> int:
        return len(self.grid)

    def _phase_sum(self, exponent_sign: float, weight: np.ndarray, sep) -> np.ndarray:
        sep = np.asarray(sep, dtype=float)
        phases = np.exp(exponent_sign * 1j * np.outer(sep.ravel(), self.grid))
        vals = phases @ weight / self.n_k
        return vals.reshape(sep.shape)

    def fdag_fdag(self, n, m):
        """<f_n^dag f_m^dag>"""
        sep = np.asarray(n) - np.asarray(m)
        return 0.5j * self._phase_sum(-1.0, np.sin(self.theta), sep)

    def ff(self, n, m):
        """<f_n f_m>"""
        sep = np.asarray(n) - np.asarray(m)
        return -0.5j * self._phase_sum(-1.0, np.sin(self.theta), sep)

    def fdag_f(self, n, m):
        """<f_n^dag f_m>"""
        sep = np.asarray(m) - np.asarray(n)
        return self._phase_sum(1.0, np.sin(self.theta / 2.0) ** 2, sep)

    def ff_dag(self, n, m):
        """<f_n f_m^dag>"""
        sep = np.asarray(m) - np.asarray(n)
        return self._phase_sum(-1.0, np.cos(self.theta / 2.0) ** 2, sep)

    def g(self, sep):
        """Real pair-correlation kernel entering the Majorana off-diagonals."""
        sep = np.asarray(sep, dtype=float)
        ks = np.outer(sep.ravel(), self.grid)
        vals = (np.cos(ks) @ np.cos(self.theta) + np.sin(ks) @ np.sin(self.theta)) / self.n_k
        return vals.reshape(sep.shape)


def exact_correlators(params: ModelParams, grid: np.ndarray) -> ExactCorrelators:
    """Momentum-sum correlators of the chain ground state on the given grid."""
    if params.lattice != "chain":
        raise ValueError("exact_correlators covers the chain; honeycomb goes through exact_entanglement")
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("momentum grid is empty")
    data = bloch(params, grid)
    return ExactCorrelators(grid, np.asarray(data.theta, dtype=float))


def exact_ground_energy(params: ModelParams) -> float:
    """-sum_k E_k over the base half-integer grid(s)."""
    if params.lattice == "chain":
        base = half_integer_grid(params.n_cells)
        return float(-bloch(params, base).energy.sum())
    g1 = half_integer_grid(params.lx)
    g2 = half_integer_grid(params.ly)
    kk = np.stack(np.meshgrid(g1, g2, indexing="ij"), axis=-1).reshape(-1, 2)
    return float(-bloch(params, kk).energy.sum())


def majorana_from_bilinears(p: np.ndarray, q: np.ndarray, r: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Assemble C = (1/2)<gamma gamma> from mode bilinear matrices.

    p = <d d^dag>, q = <d^dag d>, r = <d d>, s = <d^dag d^dag>; mode j owns
    Majoranas gamma_x = d + d^dag (row 2j) and gamma_y = -i(d - d^dag)
    (row 2j+1).
    """
    m = p.shape[0]
    corr = np.empty((2 * m, 2 * m), dtype=complex)
    corr[0::2, 0::2] = 0.5 * (r + p + q + s)
    corr[0::2, 1::2] = -0.5j * (r - p + q - s)
    corr[1::2, 0::2] = -0.5j * (r + p - q - s)
    corr[1::2, 1::2] = -0.5 * (r - p - q + s)
    return 0.5 * (corr + corr.conj().T)


def exact_majorana_matrix(params: ModelParams, grid: np.ndarray, cells: Sequence[int]) -> np.ndarray:
    """Oracle Majorana correlation matrix of the listed chain cells (1-based)."""
    corr = exact_correlators(params, grid)
    pos = np.asarray(list(cells), dtype=float)
    rows, cols = np.meshgrid(pos, pos, indexing="ij")
    q = corr.fdag_f(rows, cols)
    r = corr.ff(rows, cols)
    p = np.eye(len(pos)) - q.T
    s = r.conj().T
    return majorana_from_bilinears(p, q, r, s)


def _paired_indices(values: np.ndarray, atol: float = 1e-9):
    """Split a PH-closed momentum multiset into (q, -q) pairs and self-conjugates."""
    wrapped = np.mod(values, 2.0 * np.pi)
    used = np.zeros(len(values), dtype=bool)
    pairs, selfc = [], []
    for i in range(len(values)):
        if used[i]:
            continue
        target = np.mod(-values[i], 2.0 * np.pi)
        gap = np.abs(np.mod(wrapped - target + np.pi, 2.0 * np.pi) - np.pi)
        if gap[i] <= atol:
            used[i] = True
            selfc.append(i)
            continue
        candidates = [j for j in range(len(values)) if not used[j] and j != i and gap[j] <= atol]
        if not candidates:
            raise InvariantViolation(f"momentum set is not particle-hole closed at k = {values[i]:.6f}")
        j = candidates[0]
        used[i] = used[j] = True
        pairs.append((i, j))
    return pairs, selfc


def _honeycomb_partition_lams(params: ModelParams, dk, n_cols: int) -> np.ndarray:
    """Correlation spectrum of an x-cut (n_cols columns, all rows).

    The transverse Fourier transform block-diagonalizes the restricted
    correlations by transverse momentum q, pairing q with -q.
    """
    l1 = params.lx
    dk = np.broadcast_to(np.asarray(dk, dtype=float), (2,))
    k1 = half_integer_grid(l1) + dk[0]
    qs = half_integer_grid(params.ly) + dk[1]
    cols = np.arange(n_cols)
    sep = cols[:, None] - cols[None, :]
    ph_minus = np.exp(-1j * np.einsum("ab,k->abk", sep, k1))  # e^{ik(m'-m)}
    ph_plus = ph_minus.conj()  # e^{ik(m-m')}

    def theta_at(q: float) -> np.ndarray:
        kk = np.stack([k1, np.full_like(k1, q)], axis=-1)
        return np.asarray(bloch(params, kk).theta)

    def q_block(q: float) -> np.ndarray:
        return np.einsum("abk,k->ab", ph_minus, np.sin(theta_at(q) / 2.0) ** 2) / l1

    def pair_block(q: float) -> np.ndarray:
        return 0.5j * np.einsum("abk,k->ab", ph_plus, np.sin(theta_at(q))) / l1

    pairs, selfc = _paired_indices(qs)
    lams = []
    for i, j in pairs:
        a = n_cols
        qmat = np.zeros((2 * a, 2 * a), dtype=complex)
        qmat[:a, :a] = q_block(qs[i])
        qmat[a:, a:] = q_block(qs[j])
        rmat = np.zeros((2 * a, 2 * a), dtype=complex)
        cross = pair_block(qs[i])
        rmat[:a, a:] = cross
        rmat[a:, :a] = -cross.T
        pmat = np.eye(2 * a) - qmat.T
        lams.append(np.linalg.eigvalsh(majorana_from_bilinears(pmat, qmat, rmat, rmat.conj().T)))
    for i in selfc:
        qmat = q_block(qs[i])
        rmat = pair_block(qs[i])
        rmat = 0.5 * (rmat - rmat.T)
        pmat = np.eye(n_cols) - qmat.T
        lams.append(np.linalg.eigvalsh(majorana_from_bilinears(pmat, qmat, rmat, rmat.conj().T)))
    return np.concatenate(lams) if lams else np.array([])


def exact_entanglement(
    params: ModelParams,
    grid: np.ndarray | None,
    subsystem_size: int,
    dk=None,
) -> EntanglementResult:
    """Ground-state entanglement from exact correlators.

    chain: subsystem = the first subsystem_size cells, correlators summed over
    the given grid. honeycomb: subsystem = subsystem_size columns times all
    rows (x-cut); needs the 2-vector shift dk instead of a grid.
    """
    if params.lattice == "chain":
        if subsystem_size < 1 or subsystem_size > params.n_cells:
            raise ValueError("subsystem size out of range")
        corr = exact_majorana_matrix(params, grid, range(1, subsystem_size + 1))
        lams = np.linalg.eigvalsh(corr)
    else:
        if subsystem_size < 1 or subsystem_size > params.lx:
            raise ValueError("subsystem size out of range")
        lams = _honeycomb_partition_lams(params, (0.0, 0.0) if dk is None else dk, subsystem_size)
    return EntanglementResult(np.sort(lams), spectrum_entropy(lams, ORACLE_CLAMP))


def bdg_ground_correlations(params: ModelParams) -> dict:
    """Brute-force BCS vacuum of the anti-periodic bond-fermion chain.

    Builds the quadratic Hamiltonian in real space, converts it to Majorana
    form numerically, Schur-factorizes, and reads off the ground-state
    correlations. Independent of every momentum-space formula above.
    """
    if params.lattice != "chain":
        raise ValueError("brute force covers the chain")
    n = params.n_cells
    if n > 8:
        raise ValueError("brute force is limited to 8 cells")
    if n % 2:
        # the half-integer grid is the anti-periodic set only for even cell counts
        raise ValueError("brute force requires an even cell count")

    def vec_f(m):
        v = np.zeros(2 * n, dtype=complex)
        v[2 * m] = 0.5
        v[2 * m + 1] = 0.5j
        return v

    def vec_fdag(m):
        return vec_f(m).conj()

    coeff = np.zeros((2 * n, 2 * n), dtype=complex)
    const = 0.0
    d = float(params.flux)
    for m in range(n):
        coeff += 2.0 * params.jz * d * np.outer(vec_fdag(m), vec_f(m))
        const += -params.jz * d
    for m in range(n):
        sign = 1.0 if m < n - 1 else -1.0  # anti-periodic wrap
        u = vec_fdag(m) - vec_f(m)
        w = vec_f((m + 1) % n) + vec_fdag((m + 1) % n)
        coeff += params.jx * sign * np.outer(u, w)
    anti = 0.5 * (coeff - coeff.T)
    kmat = -4.0j * anti
    if np.max(np.abs(kmat.imag)) > 1e-12:
        raise InvariantViolation("Majorana coefficient matrix is not real")
    kmat = kmat.real
    t, o = scipy.linalg.schur(kmat, output="real")
    for j in range(n):
        if t[2 * j, 2 * j + 1] < 0.0:
            o[:, [2 * j, 2 * j + 1]] = o[:, [2 * j + 1, 2 * j]]
    block = np.array([[0.0, 1.0], [-1.0, 0.0]])
    mgs = o @ np.kron(np.eye(n), block) @ o.T
    # <H> = (1/4) Tr(K M) + scalar pieces; note Tr(K M) = -sum(K o M) elementwise
    energy = -0.25 * np.sum(kmat * mgs) + float(np.real(np.trace(coeff))) + const
    corr = 0.5 * (np.eye(2 * n) + 1j * mgs)
    gxx = 2.0 * corr[0::2, 0::2]
    gxy = 2.0 * corr[0::2, 1::2]
    gyx = 2.0 * corr[1::2, 0::2]
    gyy = 2.0 * corr[1::2, 1::2]
    return {
        "energy": float(energy),
        "majorana": corr,
        "fdag_f": 0.25 * (gxx + 1j * gxy - 1j * gyx + gyy),
        "ff_dag": 0.25 * (gxx - 1j * gxy + 1j * gyx + gyy),
        "ff": 0.25 * (gxx + 1j * gxy + 1j * gyx - gyy),
        "fdag_fdag": 0.25 * (gxx - 1j * gxy - 1j * gyx - gyy),
    }


def exact_diagonalization(params: ModelParams):
    """Ground energy and vector of the spin Hamiltonian."""
    ham = spin_hamiltonian(params)
    n = params.total_sites
    if n <= 10:
        dense = ham.toarray()
        vals, vecs = np.linalg.eigh(dense)
        idx = 0
        energy = float(vals[idx])
        vec = vecs[:, idx]
    else:
        dim = ham.shape[0]
        v0 = np.full(dim, 1.0 / math.sqrt(dim))
        vals, vecs = scipy.sparse.linalg.eigsh(ham, k=1, which="SA", v0=v0)
        energy = float(vals[0])
        vec = vecs[:, 0]
    lead = np.flatnonzero(np.abs(vec) > 1e-8)[0]
    vec = vec * (np.abs(vec[lead]) / vec[lead])
    return energy, vec


@dataclass
class JumpReport:
    """Largest adjacent entropy step on a 1D parameter scan."""

    index: int
    location: float
    magnitude: float
    found: bool


def detect_jump(xs: Sequence[float], ys: Sequence[float], flag_ratio: float = 3.0) -> JumpReport:
    """Max |dS| step detector with a no-boundary flag below flag_ratio x median."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if len(xs) < 3:
        raise ValueError("need at least 3 grid points to detect a boundary")
    diffs = np.abs(np.diff(ys))
    idx = int(np.argmax(diffs))
    med = float(np.median(diffs))
    mag = float(diffs[idx])
    if med < 1e-15:
        found = mag > 1e-12
    else:
        found = mag >= flag_ratio * med
    return JumpReport(idx, float(0.5 * (xs[idx] + xs[idx + 1])), mag, found)


@dataclass
class FiniteSizeScan:
    rows: list
    boundaries: dict


def _swept_field(params_range: Sequence[ModelParams]) -> str:
    varying = [
        f for f in ("jx", "jy", "jz")
        if len({getattr(p, f) for p in params_range}) > 1
    ]
    if len(varying) != 1:
        raise ValueError("params_range must vary exactly one coupling")
    return varying[0]


def finite_size_scan(params_range: Sequence[ModelParams], sizes: Sequence[int]) -> FiniteSizeScan:
    """Equal-partition entropies across system sizes, with per-size jump reports.

    Sizes are unit-cell counts for the chain and linear dimensions L (an LxL
    torus) for the honeycomb; the unshifted half-integer grid is used, so any
    size is allowed. Rows carry the same columns as the sweep CSV output.
    """
    if list(sizes) != sorted(sizes):
        raise ValueError("sizes must be ascending")
    field = _swept_field(params_range)
    rows = []
    boundaries = {}
    for size in sizes:
        entropies = []
        for base in params_range:
            if base.lattice == "chain":
                p = replace(base, n_sites=2 * int(size))
                grid = half_integer_grid(p.n_cells)
                result = exact_entanglement(p, grid, p.n_cells // 2)
            else:
                p = replace(base, lx=int(size), ly=int(size))
                result = exact_entanglement(p, None, p.lx // 2)
            entropies.append(result.entropy)
            rows.append(
                {
                    "lattice": p.lattice,
                    "n_cells": p.n_cells,
                    "lx": p.lx,
                    "ly": p.ly,
                    "jx": p.jx,
                    "jy": p.jy,
                    "jz": p.jz,
                    "dk": 0.0,
                    "entropy": result.entropy,
                }
            )
        xs = [getattr(p, field) for p in params_range]
        boundaries[int(size)] = detect_jump(xs, entropies)
    return FiniteSizeScan(rows, boundaries)
