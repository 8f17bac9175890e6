"""Dense statevector and small density-matrix simulator.

Conventions used by every module in this package:
  * little-endian wires: qubit w is bit w of the basis index, so a ket written
    |q0 q1 q2 ...> lists wires left to right and maps to index sum(q_w * 2^w)
  * a k-qubit gate on targets (t0, ..., t_{k-1}) uses a 2^k x 2^k matrix whose
    local index is sum(bit(t_i) << i), i.e. the first target is the least
    significant local bit
  * global phases are tracked only through explicit PHASE gates; circuit
    comparisons are up to global phase unless stated otherwise
  * all randomness flows through counter-based Philox generators seeded
    explicitly, so every stochastic result is reproducible
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

ATOL_UNITARY = 1e-12

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

GATE_ARITY = {
    "U3": 1,
    "U2": 1,
    "U1": 1,
    "CNOT": 2,
    "FSWAP": 2,
    "PHASE": 0,
    "CUSTOM1": 1,
    "CUSTOM2": 2,
}


class InvariantViolation(RuntimeError):
    """A numerical contract was broken (bad norm, non-physical spectrum, ...)."""


def rng_from_seed(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def _check_unitary(mat: np.ndarray, dim: int) -> np.ndarray:
    mat = np.asarray(mat, dtype=complex)
    if mat.shape != (dim, dim):
        raise ValueError(f"expected a {dim}x{dim} matrix, got shape {mat.shape}")
    dev = np.max(np.abs(mat.conj().T @ mat - np.eye(dim)))
    if dev > ATOL_UNITARY:
        raise ValueError(f"matrix is not unitary: max |U^dag U - I| = {dev:.3e}")
    return mat


@dataclass(frozen=True)
class GateSpec:
    """One parametrized unitary acting on explicit target wires."""

    kind: str
    targets: tuple = ()
    params: tuple = ()
    matrix: np.ndarray | None = None
    label: str = ""

    def __post_init__(self):
        if self.kind not in GATE_ARITY:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if len(self.targets) != GATE_ARITY[self.kind]:
            raise ValueError(
                f"{self.kind} expects {GATE_ARITY[self.kind]} targets, got {self.targets}"
            )
        if len(self.targets) == 2 and self.targets[0] == self.targets[1]:
            raise ValueError("two-qubit gate targets must be distinct")


def u3_matrix(theta: float, phi: float, lam: float) -> np.ndarray:
    c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
    return np.array(
        [
            [c, -np.exp(1j * lam) * s],
            [np.exp(1j * phi) * s, np.exp(1j * (phi + lam)) * c],
        ]
    )


FSWAP_MATRIX = np.array(
    [
        [1, 0, 0, 0],
        [0, 0, 1, 0],
        [0, 1, 0, 0],
        [0, 0, 0, -1],
    ],
    dtype=complex,
)

CNOT_MATRIX = np.array(
    [
        [1, 0, 0, 0],
        [0, 0, 0, 1],
        [0, 0, 1, 0],
        [0, 1, 0, 0],
    ],
    dtype=complex,
)


def gate_matrix(gate: GateSpec) -> np.ndarray:
    """Dense matrix of the gate on its local index space (PHASE: a scalar)."""
    if gate.kind == "U3":
        return u3_matrix(*gate.params)
    if gate.kind == "U2":
        phi, lam = gate.params
        return u3_matrix(np.pi / 2.0, phi, lam)
    if gate.kind == "U1":
        return u3_matrix(0.0, 0.0, gate.params[0])
    if gate.kind == "CNOT":
        return CNOT_MATRIX
    if gate.kind == "FSWAP":
        return FSWAP_MATRIX
    if gate.kind == "PHASE":
        return np.array(np.exp(1j * gate.params[0]))
    if gate.kind == "CUSTOM1":
        return _check_unitary(gate.matrix, 2)
    if gate.kind == "CUSTOM2":
        return _check_unitary(gate.matrix, 4)
    raise ValueError(f"unknown gate kind {gate.kind!r}")


def u3(theta: float, phi: float, lam: float, q: int) -> GateSpec:
    return GateSpec("U3", (q,), (float(theta), float(phi), float(lam)))


def u2(phi: float, lam: float, q: int) -> GateSpec:
    return GateSpec("U2", (q,), (float(phi), float(lam)))


def u1(lam: float, q: int) -> GateSpec:
    return GateSpec("U1", (q,), (float(lam),))


def x_gate(q: int) -> GateSpec:
    return u3(np.pi, 0.0, np.pi, q)


def cnot(control: int, target: int) -> GateSpec:
    return GateSpec("CNOT", (control, target))


def fswap(a: int, b: int) -> GateSpec:
    return GateSpec("FSWAP", (a, b))


def phase(alpha: float) -> GateSpec:
    return GateSpec("PHASE", (), (float(alpha),))


def custom1(matrix: np.ndarray, q: int, label: str = "") -> GateSpec:
    return GateSpec("CUSTOM1", (q,), (), _check_unitary(matrix, 2), label)


def custom2(matrix: np.ndarray, a: int, b: int, label: str = "") -> GateSpec:
    return GateSpec("CUSTOM2", (a, b), (), _check_unitary(matrix, 4), label)


def _dagger_gate(gate: GateSpec) -> GateSpec:
    if gate.kind == "U3":
        t, p, l = gate.params
        return GateSpec("U3", gate.targets, (-t, -l, -p))
    if gate.kind == "U2":
        p, l = gate.params
        return GateSpec("U3", gate.targets, (-np.pi / 2.0, -l, -p))
    if gate.kind == "U1":
        return GateSpec("U1", gate.targets, (-gate.params[0],))
    if gate.kind in ("CNOT", "FSWAP"):
        return gate
    if gate.kind == "PHASE":
        return GateSpec("PHASE", (), (-gate.params[0],))
    return GateSpec(gate.kind, gate.targets, (), gate.matrix.conj().T, gate.label)


@dataclass
class Circuit:
    """Ordered gate list on a fixed wire count."""

    n_qubits: int
    gates: list = field(default_factory=list)

    def add(self, gate: GateSpec) -> "Circuit":
        for t in gate.targets:
            if not 0 <= t < self.n_qubits:
                raise ValueError(f"target {t} out of range for {self.n_qubits} wires")
        self.gates.append(gate)
        return self

    def extend(self, gates) -> "Circuit":
        for g in gates:
            self.add(g)
        return self

    def dagger(self) -> "Circuit":
        out = Circuit(self.n_qubits)
        for g in reversed(self.gates):
            out.add(_dagger_gate(g))
        return out

    def remapped(self, wire_map: Mapping[int, int], n_qubits: int) -> "Circuit":
        """Embed this circuit into a larger register via wire_map."""
        out = Circuit(n_qubits)
        for g in self.gates:
            out.add(
                GateSpec(g.kind, tuple(wire_map[t] for t in g.targets), g.params, g.matrix, g.label)
            )
        return out

    def unitary(self) -> np.ndarray:
        """Dense matrix of the whole circuit (small wire counts only)."""
        dim = 1 << self.n_qubits
        cols = np.eye(dim, dtype=complex)
        for j in range(dim):
            state = PureState(self.n_qubits, cols[:, j].copy())
            cols[:, j] = run(self, state).amps
        return cols

    def two_qubit_count(self) -> int:
        return sum(1 for g in self.gates if len(g.targets) == 2)

    def to_json(self) -> str:
        items = []
        for g in self.gates:
            d = {"kind": g.kind, "targets": list(g.targets), "params": list(g.params)}
            if g.matrix is not None:
                d["matrix"] = [[[float(z.real), float(z.imag)] for z in row] for row in g.matrix]
            if g.label:
                d["label"] = g.label
            items.append(d)
        return json.dumps({"n_qubits": self.n_qubits, "gates": items}, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "Circuit":
        doc = json.loads(text)
        circ = cls(int(doc["n_qubits"]))
        for d in doc["gates"]:
            mat = None
            if "matrix" in d:
                mat = np.array([[complex(re, im) for re, im in row] for row in d["matrix"]])
            circ.add(GateSpec(d["kind"], tuple(d["targets"]), tuple(d["params"]), mat, d.get("label", "")))
        return circ


@dataclass
class PureState:
    """Normalized amplitude vector over 2^n basis states."""

    n_qubits: int
    amps: np.ndarray

    @classmethod
    def zero(cls, n_qubits: int) -> "PureState":
        amps = np.zeros(1 << n_qubits, dtype=complex)
        amps[0] = 1.0
        return cls(n_qubits, amps)

    @classmethod
    def from_bits(cls, bits: Sequence[int]) -> "PureState":
        n = len(bits)
        idx = sum(int(b) << w for w, b in enumerate(bits))
        amps = np.zeros(1 << n, dtype=complex)
        amps[idx] = 1.0
        return cls(n, amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def copy(self) -> "PureState":
        return PureState(self.n_qubits, self.amps.copy())


@dataclass
class DensityState:
    """Density matrix backend, reserved for small wire counts (<= 12)."""

    n_qubits: int
    rho: np.ndarray

    @classmethod
    def from_pure(cls, state: PureState) -> "DensityState":
        if state.n_qubits > 12:
            raise ValueError("density-matrix mode supports at most 12 wires")
        return cls(state.n_qubits, np.outer(state.amps, state.amps.conj()))

    @classmethod
    def zero(cls, n_qubits: int) -> "DensityState":
        return cls.from_pure(PureState.zero(n_qubits))

    def trace(self) -> float:
        return float(np.real(np.trace(self.rho)))


@dataclass(frozen=True)
class NoiseModel:
    """Depolarizing strength after two-qubit gates plus readout bit flips."""

    depol2: float = 0.0
    readout_flip: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.depol2 <= 1.0 and 0.0 <= self.readout_flip <= 1.0):
            raise ValueError("noise probabilities must lie in [0, 1]")


def _apply_unitary_inplace(amps: np.ndarray, mat: np.ndarray, targets: tuple, n: int) -> None:
    """Apply a k-qubit unitary on the flat amplitude array, in place."""
    k = len(targets)
    psi = amps.reshape((2,) * n)
    # axis n-1-w holds qubit w; most significant local bit first
    axes = [n - 1 - t for t in reversed(targets)]
    psi = np.moveaxis(psi, axes, range(k))
    shape = psi.shape
    flat = psi.reshape(1 << k, -1)
    flat = mat @ flat
    psi = np.moveaxis(flat.reshape(shape), range(k), axes)
    amps[:] = psi.reshape(-1)


def _apply_gate_inplace(amps: np.ndarray, gate: GateSpec, n: int) -> None:
    mat = gate_matrix(gate)
    if gate.kind == "PHASE":
        amps *= complex(mat)
        return
    _apply_unitary_inplace(amps, mat, gate.targets, n)


def apply(state: PureState, gate: GateSpec) -> PureState:
    """Apply one gate, returning a new state."""
    for t in gate.targets:
        if not 0 <= t < state.n_qubits:
            raise ValueError(f"target {t} out of range for {state.n_qubits} wires")
    out = state.copy()
    _apply_gate_inplace(out.amps, gate, out.n_qubits)
    return out


def run(circuit: Circuit, initial: PureState | None = None) -> PureState:
    """Left-to-right application of all gates on a copy of the input."""
    if initial is None:
        initial = PureState.zero(circuit.n_qubits)
    if initial.n_qubits != circuit.n_qubits:
        raise ValueError("state and circuit wire counts differ")
    out = initial.copy()
    for gate in circuit.gates:
        _apply_gate_inplace(out.amps, gate, out.n_qubits)
    return out


def _apply_density_unitary(rho: np.ndarray, mat: np.ndarray, targets: tuple, n: int) -> None:
    # row bits live above column bits in the flattened C-order index
    flat = rho.reshape(-1)
    _apply_unitary_inplace(flat, mat, tuple(n + t for t in targets), 2 * n)
    _apply_unitary_inplace(flat, mat.conj(), targets, 2 * n)


_PAULI_PAIR_LABELS = [(a, b) for a in "IXYZ" for b in "IXYZ"]


def apply_noise_channel(dstate: DensityState, targets: tuple, p: float) -> DensityState:
    """Symmetric depolarizing channel on a wire pair.

    rho -> (1 - p) rho + p * Tr_pair(rho) (x) I/4, written as a Pauli twirl.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError("depolarizing probability must lie in [0, 1]")
    if p == 0.0:
        return dstate
    n = dstate.n_qubits
    acc = np.zeros_like(dstate.rho)
    for a, b in _PAULI_PAIR_LABELS:
        mat = np.kron(PAULI[b], PAULI[a])  # first target is the low local bit
        work = dstate.rho.copy()
        _apply_density_unitary(work, mat, targets, n)
        acc += work
    rho = (1.0 - p) * dstate.rho + (p / 16.0) * acc
    return DensityState(n, rho)


def run_density(
    circuit: Circuit, initial: DensityState | None = None, noise: NoiseModel | None = None
) -> DensityState:
    """Density-matrix evolution; depol2 acts after every two-qubit gate."""
    if initial is None:
        initial = DensityState.zero(circuit.n_qubits)
    out = DensityState(initial.n_qubits, initial.rho.copy())
    for gate in circuit.gates:
        if gate.kind == "PHASE":
            continue
        mat = gate_matrix(gate)
        _apply_density_unitary(out.rho, mat, gate.targets, out.n_qubits)
        if noise is not None and noise.depol2 > 0.0 and len(gate.targets) == 2:
            out = apply_noise_channel(out, gate.targets, noise.depol2)
    return out


def _string_mask_and_phases(pauli: Mapping[int, str], n: int) -> tuple:
    dim = 1 << n
    idx = np.arange(dim)
    mask = 0
    phases = np.ones(dim, dtype=complex)
    for q, p in pauli.items():
        if not 0 <= q < n:
            raise ValueError(f"qubit {q} out of range")
        bit = (idx >> q) & 1
        if p == "X":
            mask |= 1 << q
        elif p == "Y":
            mask |= 1 << q
            phases = phases * (1j * (1 - 2 * bit))
        elif p == "Z":
            phases = phases * (1 - 2 * bit)
        else:
            raise ValueError(f"bad Pauli letter {p!r}")
    return mask, phases


def expect_pauli(state, pauli: Mapping[int, str]) -> float:
    """Exact expectation of a Pauli string; empty string gives 1."""
    n = state.n_qubits
    mask, phases = _string_mask_and_phases(pauli, n)
    idx = np.arange(1 << n)
    if isinstance(state, DensityState):
        val = np.sum(phases * state.rho[idx ^ mask, idx])
        return float(np.real(val))
    flipped = np.empty_like(state.amps)
    flipped[idx ^ mask] = phases * state.amps
    return float(np.real(np.vdot(state.amps, flipped)))


_HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2.0)
_Y_TO_Z = np.array([[1, -1j], [1, 1j]], dtype=complex) / np.sqrt(2.0)


def _bit_parity(values: np.ndarray) -> np.ndarray:
    v = values.copy()
    for shift in (16, 8, 4, 2, 1):
        v ^= v >> shift
    return v & 1


def sample_pauli(
    state,
    pauli: Mapping[int, str],
    shots: int,
    noise: NoiseModel | None = None,
    seed: int = 0,
) -> float:
    """Shot-sampled Pauli expectation with optional readout bit flips."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    if not pauli:
        return 1.0
    n = state.n_qubits
    gen = rng_from_seed(seed)
    rotations = {"X": _HADAMARD, "Y": _Y_TO_Z}
    if isinstance(state, DensityState):
        rho = state.rho.copy()
        for q, p in pauli.items():
            if p in rotations:
                _apply_density_unitary(rho, rotations[p], (q,), n)
        probs = np.real(np.diag(rho)).copy()
    else:
        amps = state.amps.copy()
        for q, p in pauli.items():
            if p in rotations:
                _apply_unitary_inplace(amps, rotations[p], (q,), n)
        probs = np.abs(amps) ** 2
    probs = np.clip(probs, 0.0, None)
    probs /= probs.sum()
    outcomes = gen.choice(1 << n, size=shots, p=probs)
    mask = 0
    for q in pauli:
        mask |= 1 << q
    parity = _bit_parity(outcomes & mask)
    if noise is not None and noise.readout_flip > 0.0:
        for _ in pauli:
            parity = parity ^ (gen.random(shots) < noise.readout_flip)
    values = 1.0 - 2.0 * parity
    return float(values.mean())


def reduced_density_matrix(state: PureState, qubits: Sequence[int]) -> np.ndarray:
    """Partial trace onto the listed wires, ordered as given (first = low bit)."""
    n = state.n_qubits
    keep = list(qubits)
    others = [q for q in range(n) if q not in keep]
    psi = state.amps.reshape((2,) * n)
    # bring kept wires to the front, most significant kept bit first
    axes = [n - 1 - q for q in reversed(keep)] + [n - 1 - q for q in others]
    psi = np.transpose(psi, axes)
    mat = psi.reshape(1 << len(keep), -1)
    return mat @ mat.conj().T


def states_equal_up_to_phase(a: PureState, b: PureState, atol: float = 1e-10) -> bool:
    overlap = np.abs(np.vdot(a.amps, b.amps))
    return bool(abs(overlap - 1.0) <= atol)


def matrices_equal_up_to_phase(a: np.ndarray, b: np.ndarray, atol: float = 1e-10) -> bool:
    ref = np.unravel_index(np.argmax(np.abs(a)), a.shape)
    if np.abs(b[ref]) < 1e-14:
        return False
    scale = a[ref] / b[ref]
    if abs(abs(scale) - 1.0) > atol:
        return False
    return bool(np.max(np.abs(a - scale * b)) <= atol)
