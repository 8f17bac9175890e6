"""Ground-state preparation circuits and momentum-shifted variants.

Wire bookkeeping is one fermionic mode per wire, Jordan-Wigner ordered by
wire index, so every two-mode gate (Bogoliubov B, Fourier butterfly F) acts
on adjacent wires and all reorderings are explicit FSWAP networks.

Three layouts share the building blocks:

* plain preparation: N bond wires then N gauge wires; gauge wires are set to
  occupied (the D = +1 flux sector) and never touched again until the final
  interleave; Bogoliubov blocks pair (-k, +k) partners of the anti-periodic
  grid, a Fourier network returns to position space, and one braiding block
  per cell turns (bond, gauge) occupations into the two site spins, leaving
  wire w = lattice site w + 1.
* enforced layout: two bond-fermion copies on 2N wires carrying the grids
  +(K + dk) and -(K + dk); partners are swapped adjacent before the
  Bogoliubov layer and swapped back after, each copy gets its own shifted
  Fourier network, and a final combiner leaves the measured modes on wires
  0..N-1 whose correlators follow the union of the two shifted grids.
* simplified layout: at the special shift dk = pi/N the two copies are
  identical, so a single copy on N wires suffices; the blocks at the
  self-conjugate momenta 0 and pi degenerate to identities, which is only
  consistent when the dispersion gap vanishes there.

The momentum convention throughout is f_n = (1/sqrt N) sum_k e^{ikn} f_k
with positions n = 0..N-1, so a network with offset dk appends the phase
layer U1(dk * n) on position wire n.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .braid_gates import z_bond_braiding
from .kitaev_models import (
    ModelParams,
    _require_power_of_two,
    bloch,
    half_integer_grid,
)
from .sv_core import Circuit, InvariantViolation, custom2, fswap, u1, x_gate

GAP_CLOSED_TOL = 1e-9

_S = 1.0 / np.sqrt(2.0)
F_MATRIX = np.array(
    [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, _S, _S, 0.0],
        [0.0, _S, -_S, 0.0],
        [0.0, 0.0, 0.0, -1.0],
    ]
)


@dataclass(frozen=True)
class PrepPlan:
    """Validated wire budget and flags for one circuit build."""

    params: ModelParams
    dk: float = 0.0
    enforce_ph: bool = False
    simplified: bool = False
    bond_wires: tuple = ()
    gauge_wires: tuple = ()
    measured_wires: tuple = ()

    @property
    def n_wires(self) -> int:
        return len(self.bond_wires) + len(self.gauge_wires)


def _theta_at(params: ModelParams, k1) -> np.ndarray:
    """Bogoliubov angles along the chain direction (k2 = 0 for one row)."""
    k1 = np.asarray(k1, dtype=float)
    if params.lattice == "chain":
        return np.atleast_1d(bloch(params, k1).theta)
    kk = np.stack([k1, np.zeros_like(k1)], axis=-1)
    return np.atleast_1d(bloch(params, kk).theta)


def _energy_at(params: ModelParams, k1) -> np.ndarray:
    k1 = np.asarray(k1, dtype=float)
    if params.lattice == "chain":
        return np.atleast_1d(bloch(params, k1).energy)
    kk = np.stack([k1, np.zeros_like(k1)], axis=-1)
    return np.atleast_1d(bloch(params, kk).energy)


def _check_special_shift(params: ModelParams, dk: float) -> None:
    n = params.n_cells
    if abs(dk * n / (2.0 * np.pi) - 0.5) > 1e-12:
        raise ValueError(
            f"single-copy reduction exists only at the special shift pi/N, got dk={dk!r}"
        )
    gap = _energy_at(params, np.array([0.0, np.pi])).min()
    if gap > GAP_CLOSED_TOL:
        raise ValueError(
            "single-copy reduction needs a vanishing dispersion gap at a "
            f"self-conjugate momentum; smallest gap here is {gap:.6g}"
        )


def make_plan(
    params: ModelParams,
    dk: float = 0.0,
    enforce_ph: bool = False,
    simplified: bool = False,
) -> PrepPlan:
    """Validate flags and allocate wires for one of the three layouts."""
    if params.lattice == "honeycomb" and params.ly != 1:
        raise ValueError("circuit construction covers single-row honeycomb clusters only")
    n = params.n_cells
    _require_power_of_two(n, "number of unit cells")
    if enforce_ph and simplified:
        raise ValueError("choose either the enforced layout or its single-copy reduction")
    dk = float(dk)
    if simplified:
        _check_special_shift(params, dk)
        bond, gauge, measured = tuple(range(n)), (), tuple(range(n))
    elif enforce_ph:
        bond, gauge, measured = tuple(range(2 * n)), (), tuple(range(n))
    else:
        if dk != 0.0:
            raise ValueError(
                "plain preparation uses the unshifted grid; build an enforced "
                "plan for momentum-shifted measurements"
            )
        bond, gauge, measured = tuple(range(n)), tuple(range(n, 2 * n)), ()
    return PrepPlan(params, dk, enforce_ph, simplified, bond, gauge, measured)


def _route(circ: Circuit, w0: int, order, target) -> None:
    """Adjacent-FSWAP bubble network turning mode layout order into target."""
    order = list(order)
    pos = {mode: i for i, mode in enumerate(target)}
    moved = True
    while moved:
        moved = False
        for i in range(len(order) - 1):
            if pos[order[i]] > pos[order[i + 1]]:
                circ.add(fswap(w0 + i, w0 + i + 1))
                order[i], order[i + 1] = order[i + 1], order[i]
                moved = True


def _fourier_block(circ: Circuit, w0: int, size: int) -> None:
    if size == 1:
        return
    h = size // 2
    deal = list(range(0, size, 2)) + list(range(1, size, 2))
    _route(circ, w0, list(range(size)), deal)
    _fourier_block(circ, w0, h)
    _fourier_block(circ, w0 + h, h)
    for j in range(1, h):
        circ.add(u1(2.0 * np.pi * j / size, w0 + h + j))
    half_pairs = [("a", j) for j in range(h)] + [("b", j) for j in range(h)]
    riffled = [t for j in range(h) for t in (("a", j), ("b", j))]
    _route(circ, w0, half_pairs, riffled)
    for j in range(h):
        circ.add(custom2(F_MATRIX, w0 + 2 * j, w0 + 2 * j + 1, "F"))
    after = [p for j in range(h) for p in (j, h + j)]
    _route(circ, w0, after, list(range(size)))


def fourier_network(n_modes: int, dk: float = 0.0) -> Circuit:
    """Radix-2 fermionic Fourier network plus the shift phase layer.

    Input wire m holds the mode of momentum 2 pi m / N + dk; output wire n
    holds position mode n. Built from F butterflies on adjacent wires with
    FSWAP deal/riffle reorderings and twiddle phases; the trailing U1(dk n)
    layer implements the grid shift.
    """
    _require_power_of_two(n_modes, "mode count")
    circ = Circuit(n_modes)
    _fourier_block(circ, 0, n_modes)
    for n in range(n_modes):
        circ.add(u1(dk * n, n))
    return circ


def bogoliubov_matrix(theta: float, phi: float = np.pi / 2.0) -> np.ndarray:
    c = np.cos(theta / 2.0)
    s = np.sin(theta / 2.0)
    return np.array(
        [
            [c, 0.0, 0.0, -np.exp(-1j * phi) * s],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [np.exp(1j * phi) * s, 0.0, 0.0, c],
        ]
    )


def bogoliubov_block(theta: float, phi: float = np.pi / 2.0) -> Circuit:
    """Pair rotation on adjacent wires (-k, +k): |00> -> c|00> + i s|11>.

    The resulting two-mode state is annihilated by both Bogoliubov operators
    of the (k, -k) pair; the odd-parity block is untouched.
    """
    if not (np.isfinite(theta) and np.isfinite(phi)):
        raise ValueError("angles must be finite")
    circ = Circuit(2)
    circ.add(custom2(bogoliubov_matrix(theta, phi), 0, 1, "B"))
    return circ


def prepare_ground_state(plan: PrepPlan) -> Circuit:
    """Full spin ground-state preparation; wire w ends up as site w + 1."""
    if plan.enforce_ph or plan.simplified:
        raise ValueError("plain preparation plan required")
    params = plan.params
    n = params.n_cells
    circ = Circuit(2 * n)
    for g in plan.gauge_wires:
        circ.add(x_gate(g))
    grid = half_integer_grid(n)
    theta = _theta_at(params, grid)
    order = []
    for j in range(n // 2):
        order += [j, n - 1 - j]
        block = bogoliubov_block(theta[n - 1 - j])
        circ.extend(block.remapped({0: 2 * j, 1: 2 * j + 1}, 2 * n).gates)
    if n == 1:
        order = [0]
        if abs(theta[0]) > 1e-9:
            raise InvariantViolation("occupied self-conjugate mode; no X-free layout")
    _route(circ, 0, order, list(range(n)))
    circ.extend(fourier_network(n, np.pi / n - np.pi).remapped({i: i for i in range(n)}, 2 * n).gates)
    # interleave bond and gauge wires, then braid each cell into site spins
    block_order = [("f", i) for i in range(n)] + [("g", i) for i in range(n)]
    interleaved = [t for i in range(n) for t in (("f", i), ("g", i))]
    _route(circ, 0, block_order, interleaved)
    bond = z_bond_braiding(1)
    for i in range(n):
        circ.extend(bond.circuit.remapped({0: 2 * i, 1: 2 * i + 1}, 2 * n).gates)
    return circ


def symmetry_enforced_circuit(plan: PrepPlan) -> Circuit:
    """Two-copy measurement circuit for the shifted grids +-(K + dk)."""
    if not plan.enforce_ph:
        raise ValueError("enforced plan required")
    params = plan.params
    n = params.n_cells
    dk = plan.dk
    kplus = half_integer_grid(n) + dk
    theta = _theta_at(params, kplus)
    circ = Circuit(2 * n)
    # swap partners adjacent: wire 2m = -(K_m + dk) copy, wire 2m+1 = + copy
    start = [("p", m) for m in range(n)] + [("m", m) for m in range(n)]
    paired = [t for m in range(n) for t in (("m", m), ("p", m))]
    _route(circ, 0, start, paired)
    for m in range(n):
        block = bogoliubov_block(theta[m])
        circ.extend(block.remapped({0: 2 * m, 1: 2 * m + 1}, 2 * n).gates)
    # swap back per copy; the minus copy reversed so its grid ascends as K - dk
    unpaired = [("p", m) for m in range(n)] + [("m", n - 1 - m) for m in range(n)]
    _route(circ, 0, paired, unpaired)
    delta = np.pi / n - np.pi
    circ.extend(fourier_network(n, delta + dk).remapped({i: i for i in range(n)}, 2 * n).gates)
    circ.extend(fourier_network(n, delta - dk).remapped({i: n + i for i in range(n)}, 2 * n).gates)
    # combine the copies pairwise; measured modes end up on wires 0..n-1
    blocks = [("A", j) for j in range(n)] + [("B", j) for j in range(n)]
    riffled = [t for j in range(n) for t in (("A", j), ("B", j))]
    _route(circ, 0, blocks, riffled)
    for j in range(n):
        circ.add(custom2(F_MATRIX, 2 * j, 2 * j + 1, "F"))
    _route(circ, 0, riffled, blocks)
    return circ


def simplified_special_shift_circuit(plan: PrepPlan) -> Circuit:
    """Single-copy reduction of the enforced circuit at dk = pi/N."""
    if not plan.simplified:
        raise ValueError("simplified plan required")
    params = plan.params
    n = params.n_cells
    _check_special_shift(params, plan.dk)
    qgrid = half_integer_grid(n) + plan.dk
    theta = _theta_at(params, qgrid)
    circ = Circuit(n)
    order = []
    for j in range(max(n // 2 - 1, 0)):
        order += [j, n - 2 - j]
        block = bogoliubov_block(theta[n - 2 - j])
        circ.extend(block.remapped({0: 2 * j, 1: 2 * j + 1}, n).gates)
    if n == 1:
        order = [0]
        selfconj = [0]
    else:
        order += [n // 2 - 1, n - 1]
        selfconj = [n // 2 - 1, n - 1]
    if np.abs(theta[selfconj]).max() > 1e-9:
        raise InvariantViolation("occupied self-conjugate mode; no X-free layout")
    _route(circ, 0, order, list(range(n)))
    circ.extend(fourier_network(n, np.pi / n - np.pi + plan.dk).gates)
    return circ
