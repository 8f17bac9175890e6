"""Entanglement measurement on simulated states.

Two routes are implemented:
  * string correlators -> fermion bilinears -> Majorana correlation matrix ->
    entanglement spectrum and entropy (scales with subsystem size only)
  * subsystem tomography: all Pauli expectations on a few qubits, linear
    inversion, then maximum-likelihood projection onto physical states

Fermion conventions: |0> is the empty mode, f_m = (prod_{j<m} Z_j) sigma^-_m
along the Jordan-Wigner order. String correlators carry the Z product strictly
between the endpoints. A Majorana correlation matrix is C = (1/2)<gamma_a
gamma_b> with gamma_{2m-1} the X-type and gamma_{2m} the Y-type partner.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import sv_core
from .sv_core import InvariantViolation, NoiseModel, reduced_density_matrix

DEFAULT_SHOTS = 8196
EIG_CLAMP_EXACT = 1e-6

_PAULI_MUL = {
    ("X", "X"): (1.0, "I"),
    ("Y", "Y"): (1.0, "I"),
    ("Z", "Z"): (1.0, "I"),
    ("X", "Y"): (1j, "Z"),
    ("Y", "X"): (-1j, "Z"),
    ("Y", "Z"): (1j, "X"),
    ("Z", "Y"): (-1j, "X"),
    ("Z", "X"): (1j, "Y"),
    ("X", "Z"): (-1j, "Y"),
}


def _mul_pauli(a: str, b: str):
    if a == "I":
        return 1.0, b
    if b == "I":
        return 1.0, a
    return _PAULI_MUL[(a, b)]


@dataclass
class EntanglementResult:
    """Sorted correlation-matrix eigenvalues and the entropy they imply."""

    spectrum: np.ndarray
    entropy: float


@dataclass(frozen=True)
class MeasureSettings:
    """How expectations are taken: exact inner products or shot sampling."""

    backend: str = "exact"
    shots: int = DEFAULT_SHOTS
    noise: NoiseModel | None = None
    seed: int = 0

    def __post_init__(self):
        if self.backend not in ("exact", "shots"):
            raise ValueError(f"unknown backend {self.backend!r}")
        if self.shots < 1:
            raise ValueError("shots must be >= 1")


def spectrum_entropy(lams: np.ndarray, clamp: float) -> float:
    """Entropy -1/2 sum[(1-l)ln(1-l) + l ln l] with eigenvalue clamping."""
    lams = np.asarray(lams, dtype=float)
    if lams.size and (lams.min() < -clamp or lams.max() > 1.0 + clamp):
        raise InvariantViolation(
            f"correlation eigenvalues outside [0,1] band {clamp:g}: "
            f"[{lams.min():.3e}, {lams.max():.3e}]"
        )
    lams = np.clip(lams, 0.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(lams > 0.0, lams * np.log(lams), 0.0)
        terms = terms + np.where(lams < 1.0, (1.0 - lams) * np.log1p(-lams), 0.0)
    return float(-0.5 * terms.sum())


def _jw_positions(jw_order: Sequence[int]) -> dict:
    return {site: pos for pos, site in enumerate(jw_order)}


def string_correlator(state, m: int, n: int, alpha: str, beta: str, jw_order: Sequence[int]):
    """<sigma^alpha_m (prod of Z strictly between) sigma^beta_n> on sites m < n.

    m, n are 1-based site labels; the Z string runs over the sites strictly
    between them in jw_order; site s acts on qubit s - 1.
    """
    if m == n:
        raise ValueError("string correlator endpoints must differ")
    if alpha not in ("x", "y", "X", "Y") or beta not in ("x", "y", "X", "Y"):
        raise ValueError("endpoint operators must be x or y")
    pos = _jw_positions(jw_order)
    if pos[m] > pos[n]:
        raise ValueError("m must precede n in the Jordan-Wigner order")
    pauli = {m - 1: alpha.upper(), n - 1: beta.upper()}
    for j in range(pos[m] + 1, pos[n]):
        pauli[jw_order[j] - 1] = "Z"
    return sv_core.expect_pauli(state, pauli)


def _majorana_string(descriptor, jw_order: Sequence[int]) -> dict:
    """Pauli string of one string-dressed Majorana (JW position, letter)."""
    p, letter = descriptor
    pauli = {jw_order[j] - 1: "Z" for j in range(p)}
    pauli[jw_order[p] - 1] = letter
    return pauli


def _string_product(pa: Mapping[int, str], pb: Mapping[int, str]):
    coeff = 1.0 + 0.0j
    out = {}
    for q in set(pa) | set(pb):
        c, letter = _mul_pauli(pa.get(q, "I"), pb.get(q, "I"))
        coeff *= c
        if letter != "I":
            out[q] = letter
    return coeff, out


def fermion_correlators(state, m: int, n: int, jw_order: Sequence[int] | None = None) -> dict:
    """The four bilinears of Jordan-Wigner fermions at positions m, n (1-based).

    Keys: 'ff_dag' = <f_m f_n^dag>, 'fdag_f' = <f_m^dag f_n>,
    'ff' = <f_m f_n>, 'fdag_fdag' = <f_m^dag f_n^dag>.
    """
    if jw_order is None:
        jw_order = tuple(range(1, state.n_qubits + 1))
    if m == n:
        z = sv_core.expect_pauli(state, {m - 1: "Z"})
        occ = (1.0 - z) / 2.0
        return {"ff_dag": 1.0 - occ, "fdag_f": occ, "ff": 0.0, "fdag_fdag": 0.0}
    pos = _jw_positions(jw_order)
    if pos[m] > pos[n]:
        swapped = fermion_correlators(state, n, m, jw_order)
        return {
            "ff_dag": np.conj(swapped["ff_dag"]),
            "fdag_f": np.conj(swapped["fdag_f"]),
            "ff": -swapped["ff"],
            "fdag_fdag": -swapped["fdag_fdag"],
        }
    cxx = string_correlator(state, m, n, "x", "x", jw_order)
    cyy = string_correlator(state, m, n, "y", "y", jw_order)
    cxy = string_correlator(state, m, n, "x", "y", jw_order)
    cyx = string_correlator(state, m, n, "y", "x", jw_order)
    return {
        "fdag_fdag": 0.25 * (cxx - 1j * cxy - 1j * cyx - cyy),
        "ff": -0.25 * (cxx + 1j * cxy + 1j * cyx - cyy),
        "fdag_f": 0.25 * (cxx + 1j * cxy - 1j * cyx + cyy),
        "ff_dag": -0.25 * (cxx - 1j * cxy + 1j * cyx + cyy),
    }


def _cell_descriptors(cells: Sequence[int], jw_order: Sequence[int]):
    """Majorana descriptors of bond-fermion cells: X on the odd site, Y on the even."""
    pos = _jw_positions(jw_order)
    out = []
    for c in cells:
        out.append((pos[2 * c - 1], "X"))
        out.append((pos[2 * c], "Y"))
    return out


def _mode_descriptors(wires: Sequence[int]):
    return [(int(w), letter) for w in wires for letter in ("X", "Y")]


def correlation_matrix(
    state,
    subsystem: Sequence[int],
    jw_order: Sequence[int] | None = None,
    basis: str = "site",
    settings: MeasureSettings | None = None,
) -> np.ndarray:
    """Majorana correlation matrix C_{a,b} = (1/2)<gamma_a gamma_b>.

    basis='site': subsystem lists 1-based bond-fermion cells; cell c owns the
    X Majorana of site 2c-1 and the Y Majorana of site 2c along jw_order.
    basis='mode': subsystem lists 0-based wires, each hosting one fermion mode
    in wire order (used for circuits whose wires are fermion modes directly).
    Hermiticity is enforced by symmetrization before returning.
    """
    if len(subsystem) == 0:
        raise ValueError("subsystem must be nonempty")
    settings = settings or MeasureSettings()
    if basis == "site":
        if jw_order is None:
            jw_order = tuple(range(1, state.n_qubits + 1))
        descriptors = _cell_descriptors(subsystem, jw_order)
        strings = [_majorana_string(d, jw_order) for d in descriptors]
    elif basis == "mode":
        order = tuple(range(1, state.n_qubits + 1))
        strings = [_majorana_string(d, order) for d in _mode_descriptors(subsystem)]
    else:
        raise ValueError(f"unknown basis {basis!r}")
    dim = len(strings)
    need = {}
    entries = []
    for a in range(dim):
        for b in range(a + 1, dim):
            coeff, prod = _string_product(strings[a], strings[b])
            key = tuple(sorted(prod.items()))
            if key not in need:
                need[key] = len(need)
            entries.append((a, b, coeff, key))
    values = _estimate_strings(state, list(need), settings)
    corr = 0.5 * np.eye(dim, dtype=complex)
    for a, b, coeff, key in entries:
        val = 0.5 * coeff * values[need[key]]
        corr[a, b] = val
        corr[b, a] = np.conj(val)
    return 0.5 * (corr + corr.conj().T)


def _estimate_strings(state, keys, settings: MeasureSettings) -> np.ndarray:
    out = np.empty(len(keys), dtype=float)
    if settings.backend == "exact":
        for i, key in enumerate(keys):
            out[i] = sv_core.expect_pauli(state, dict(key))
        return out
    seeds = np.random.SeedSequence(settings.seed).generate_state(max(len(keys), 1), dtype=np.uint64)
    for i, key in enumerate(keys):
        if not key:
            out[i] = 1.0
            continue
        out[i] = sv_core.sample_pauli(
            state, dict(key), settings.shots, noise=settings.noise, seed=int(seeds[i])
        )
    return out


def entanglement(corr: np.ndarray, clamp: float | None = None) -> EntanglementResult:
    """Spectrum and entropy of a Majorana correlation matrix.

    The clamp band defaults to 1e-6 (exact backends); widen it to 5/sqrt(shots)
    for sampled matrices.
    """
    corr = np.asarray(corr)
    herm_dev = np.max(np.abs(corr - corr.conj().T)) if corr.size else 0.0
    if herm_dev > 1e-9:
        raise InvariantViolation(f"correlation matrix not Hermitian: {herm_dev:.3e}")
    lams = np.linalg.eigvalsh(corr)
    band = EIG_CLAMP_EXACT if clamp is None else clamp
    entropy = spectrum_entropy(lams, band)
    return EntanglementResult(np.sort(lams), entropy)


def project_to_physical(rho: np.ndarray) -> np.ndarray:
    """Nearest density matrix: rescale trace, then eigenvalue redistribution.

    Negative eigenvalues are zeroed in ascending order while their mass is
    spread uniformly over the remaining ones, preserving the unit trace.
    """
    rho = np.asarray(rho, dtype=complex)
    rho = rho / np.trace(rho)
    eigvals, eigvecs = np.linalg.eigh(rho)
    if eigvals.min() >= 0.0:
        return rho
    vals = list(eigvals)
    vals.reverse()
    new_vals = [0.0] * len(vals)
    i = len(vals)
    accumulator = 0.0
    while vals[i - 1] + accumulator / float(i) < 0.0:
        accumulator += vals[i - 1]
        i -= 1
    for j in range(i):
        new_vals[j] = vals[j] + accumulator / float(i)
    new_vals.reverse()
    return (eigvecs * np.array(new_vals)) @ eigvecs.conj().T


def _pauli_letter_matrices():
    return {k: v for k, v in sv_core.PAULI.items()}


def tomography_mle(
    state,
    subsystem_qubits: Sequence[int],
    shots: int | None = None,
    seed: int = 0,
    noise: NoiseModel | None = None,
) -> np.ndarray:
    """Reconstruct the reduced density matrix on a few qubits.

    All 4^m Pauli expectations are taken (exactly when shots is None, sampled
    otherwise), linearly inverted, and projected to the nearest physical
    state. subsystem_qubits[i] becomes local bit i of the output.
    """
    qubits = list(subsystem_qubits)
    m = len(qubits)
    if m < 1 or m > 4:
        raise ValueError("tomography supports 1 to 4 qubits")
    if shots is not None and shots < 1:
        raise ValueError("shots must be >= 1")
    letters = ["I", "X", "Y", "Z"]
    labels = [[]]
    for _ in range(m):
        labels = [lab + [l] for lab in labels for l in letters]
    seeds = np.random.SeedSequence(seed).generate_state(len(labels), dtype=np.uint64)
    mats = _pauli_letter_matrices()
    dim = 1 << m
    rho = np.zeros((dim, dim), dtype=complex)
    for i, lab in enumerate(labels):
        pauli = {qubits[j]: lab[j] for j in range(m) if lab[j] != "I"}
        if not pauli:
            val = 1.0
        elif shots is None:
            val = sv_core.expect_pauli(state, pauli)
        else:
            val = sv_core.sample_pauli(state, pauli, shots, noise=noise, seed=int(seeds[i]))
        op = np.eye(1, dtype=complex)
        for j in reversed(range(m)):
            op = np.kron(op, mats[lab[j]])
        rho += val * op
    rho /= dim
    return project_to_physical(rho)


def entropy_from_density_matrix(rho: np.ndarray, atol: float = 1e-10) -> float:
    """Von Neumann entropy -sum p ln p; rejects non-physical inputs."""
    rho = np.asarray(rho)
    probs = np.linalg.eigvalsh(rho)
    if probs.min() < -atol:
        raise InvariantViolation(f"density matrix has negative eigenvalue {probs.min():.3e}")
    if abs(probs.sum() - 1.0) > 1e-8:
        raise InvariantViolation(f"density matrix trace {probs.sum():.10f} is not 1")
    probs = np.clip(probs, 0.0, None)
    nonzero = probs[probs > 0.0]
    return float(-(nonzero * np.log(nonzero)).sum())


def matrix_csv(mat: np.ndarray) -> str:
    """Row-major CSV with each complex entry as a re,im pair."""
    lines = []
    for row in np.atleast_2d(mat):
        parts = []
        for z in row:
            z = complex(z)
            parts.append(f"{z.real + 0.0:.12g},{z.imag + 0.0:.12g}")
        lines.append(",".join(parts))
    return "\n".join(lines) + "\n"


def spectrum_csv(result: EntanglementResult) -> str:
    lines = ["eig_index,lam"]
    for i, lam in enumerate(result.spectrum):
        lines.append(f"{i},{lam:.12g}")
    lines.append(f"entropy,{result.entropy:.12g}")
    return "\n".join(lines) + "\n"
