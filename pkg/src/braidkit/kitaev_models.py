"""Kitaev-type spin models and their free-fermion data.

Two lattices are covered:
  * chain: sites 1..n_sites on a ring, bonds alternate ZZ (odd, even) and
    XX (even, odd); pairs (2i-1, 2i) form the z-bonds that define unit cells
  * honeycomb: lx x ly unit cells with two sites per cell and x/y/z colored
    bonds; explicit spin Hamiltonians are built for single-row strips (ly = 1),
    where the y-bond acts inside the cell and the x-bond links neighboring
    cells along the row

Bond-fermion conventions: each z-bond hosts one itinerant bond fermion and one
gauge fermion whose occupation fixes the local flux D. The Bloch data below
describe the bond fermions in the uniform-flux sector on particle-hole
symmetric momentum grids (anti-periodic fermions for the periodic spin ring,
hence half-integer grids).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

GAP_ATOL = 1e-12

_PAULI_SPARSE = {
    "I": sp.identity(2, format="csr", dtype=complex),
    "X": sp.csr_matrix(np.array([[0, 1], [1, 0]], dtype=complex)),
    "Y": sp.csr_matrix(np.array([[0, -1j], [1j, 0]], dtype=complex)),
    "Z": sp.csr_matrix(np.array([[1, 0], [0, -1]], dtype=complex)),
}


@dataclass(frozen=True)
class ModelParams:
    """Couplings, sizes, gauge flux, and boundary of one model instance."""

    lattice: str
    jx: float = 0.0
    jy: float = 0.0
    jz: float = 1.0
    n_sites: int = 0
    lx: int = 0
    ly: int = 0
    flux: int = 1
    boundary: str = "periodic"

    def __post_init__(self):
        if self.lattice not in ("chain", "honeycomb"):
            raise ValueError(f"unknown lattice {self.lattice!r}")
        if self.flux not in (1, -1):
            raise ValueError("flux must be +1 or -1")
        if self.boundary not in ("periodic", "open"):
            raise ValueError(f"unknown boundary {self.boundary!r}")
        if self.lattice == "chain":
            if self.n_sites < 2 or self.n_sites % 2:
                raise ValueError("chain needs an even number of sites >= 2")
        else:
            if self.lx < 1 or self.ly < 1:
                raise ValueError("honeycomb needs lx >= 1 and ly >= 1")
            if self.boundary != "periodic":
                raise ValueError("honeycomb supports periodic boundaries only")

    @property
    def n_cells(self) -> int:
        if self.lattice == "chain":
            return self.n_sites // 2
        return self.lx * self.ly

    @property
    def total_sites(self) -> int:
        return 2 * self.n_cells


@dataclass
class BlochData:
    """Dispersion and Bogoliubov angles at the given momenta.

    theta is set to 0 wherever the gap closes (energy below GAP_ATOL); the
    gap_closed mask records those points.
    """

    momentum: np.ndarray
    epsilon: np.ndarray
    delta: np.ndarray
    energy: np.ndarray
    theta: np.ndarray
    phi: np.ndarray
    gap_closed: np.ndarray


def _pauli_term(n_qubits: int, ops: dict) -> sp.csr_matrix:
    """Sparse Pauli product; ops maps 0-based qubit -> letter."""
    mat = sp.identity(1, format="csr", dtype=complex)
    for w in range(n_qubits):
        mat = sp.kron(_PAULI_SPARSE[ops.get(w, "I")], mat, format="csr")
    return mat


def _site_pair_term(n: int, s1: int, s2: int, letter: str) -> sp.csr_matrix:
    """Bond term on 1-based sites s1, s2 (site s sits on qubit s-1)."""
    return _pauli_term(n, {s1 - 1: letter, s2 - 1: letter})


def spin_hamiltonian(params: ModelParams) -> sp.csr_matrix:
    """Sparse spin-1/2 Hamiltonian with bond terms of eigenvalues +-J."""
    n = params.total_sites
    if n > 16:
        raise ValueError("spin Hamiltonians are limited to 16 sites")
    dim = 1 << n
    ham = sp.csr_matrix((dim, dim), dtype=complex)
    if params.lattice == "chain":
        cells = params.n_cells
        for i in range(1, cells + 1):
            ham = ham + params.jz * _site_pair_term(n, 2 * i - 1, 2 * i, "Z")
        x_bonds = [(2 * i, 2 * i + 1) for i in range(1, cells)]
        if params.boundary == "periodic" and cells > 1:
            x_bonds.append((2 * cells, 1))
        for s1, s2 in x_bonds:
            ham = ham + params.jx * _site_pair_term(n, s1, s2, "X")
        return ham
    if params.ly != 1:
        raise ValueError("explicit honeycomb Hamiltonians support ly = 1 strips only")
    cells = params.lx
    for c in range(cells):
        ham = ham + params.jz * _site_pair_term(n, 2 * c + 1, 2 * c + 2, "Z")
        # single-row torus: the y-neighbor wraps onto the same cell
        ham = ham + params.jy * _site_pair_term(n, 2 * c + 1, 2 * c + 2, "Y")
    for c in range(cells):
        s1 = 2 * c + 2
        s2 = 2 * c + 3 if c < cells - 1 else 1
        if cells == 1:
            break
        ham = ham + params.jx * _site_pair_term(n, s1, s2, "X")
    return ham


def jordan_wigner_order(params: ModelParams) -> tuple:
    """1-based site ordering along the fermionization string."""
    if params.lattice == "chain":
        return tuple(range(1, params.n_sites + 1))
    if params.ly != 1:
        raise ValueError("string ordering is defined here for ly = 1 strips only")
    return tuple(range(1, 2 * params.lx + 1))


def bloch(params: ModelParams, k) -> BlochData:
    """Bond-fermion dispersion and Bogoliubov angles.

    chain: k is a scalar or 1D array of momenta.
    honeycomb: k is a pair (k1, k2) or an array of shape (..., 2).
    """
    d = float(params.flux)
    if params.lattice == "chain":
        kk = np.asarray(k, dtype=float)
        eps = params.jz * d + params.jx * np.cos(kk)
        delta = params.jx * np.sin(kk)
    else:
        kk = np.asarray(k, dtype=float)
        k1, k2 = kk[..., 0], kk[..., 1]
        eps = params.jz * d + params.jx * np.cos(k1) + params.jy * np.cos(k2)
        delta = params.jx * np.sin(k1) + params.jy * np.sin(k2)
    energy = np.hypot(eps, delta)
    closed = energy < GAP_ATOL
    theta = np.where(closed, 0.0, np.arctan2(delta, eps))
    phi = np.full_like(energy, np.pi / 2.0)
    return BlochData(kk, eps, delta, energy, theta, phi, closed)


def half_integer_grid(n_cells: int) -> np.ndarray:
    """Base momentum points (m + 1/2 - N/2) 2pi/N, any N >= 1."""
    m = np.arange(n_cells)
    return (m + 0.5 - n_cells / 2.0) * (2.0 * np.pi / n_cells)


def _require_power_of_two(n: int, what: str) -> None:
    if n < 1 or (n & (n - 1)):
        raise ValueError(f"{what} must be a power of two, got {n}")


def momentum_grid(params: ModelParams, dk=0.0) -> np.ndarray:
    """Particle-hole paired grid {K + dk} followed by {-(K + dk)}.

    The base K is the half-integer grid; the returned multiset always has
    2 n_cells entries so correlator sums normalize by its full length.
    chain: returns shape (2N,); honeycomb: shape (2N, 2) with dk a 2-vector.
    """
    if params.lattice == "chain":
        _require_power_of_two(params.n_cells, "number of unit cells")
        base = half_integer_grid(params.n_cells) + float(dk)
        return np.concatenate([base, -base])
    _require_power_of_two(params.lx, "lx")
    _require_power_of_two(params.ly, "ly")
    dk = np.broadcast_to(np.asarray(dk, dtype=float), (2,))
    g1 = half_integer_grid(params.lx) + dk[0]
    g2 = half_integer_grid(params.ly) + dk[1]
    base = np.stack(np.meshgrid(g1, g2, indexing="ij"), axis=-1).reshape(-1, 2)
    return np.concatenate([base, -base], axis=0)
