"""Statevector kernel: endianness, gate conventions, noise, sampling."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from braidkit.sv_core import (
    Circuit,
    DensityState,
    NoiseModel,
    PureState,
    apply_noise_channel,
    cnot,
    custom2,
    expect_pauli,
    fswap,
    gate_matrix,
    phase,
    reduced_density_matrix,
    run,
    run_density,
    sample_pauli,
    u1,
    u3,
    x_gate,
)


def random_state(n, seed):
    gen = np.random.default_rng(seed)
    amps = gen.normal(size=1 << n) + 1j * gen.normal(size=1 << n)
    amps /= np.linalg.norm(amps)
    return PureState(n, amps)


def test_from_bits_is_little_endian():
    state = PureState.from_bits([1, 0, 1])
    assert state.amps[0b101] == 1.0
    assert np.count_nonzero(state.amps) == 1


def test_x_gate_flips_low_wire():
    circ = Circuit(2, [x_gate(0)])
    out = run(circ)
    assert out.amps[1] == 1.0


def test_two_qubit_first_target_is_low_local_bit():
    # on wires (0, 1) of a 2-qubit register the gate matrix acts verbatim
    mat = np.diag([1.0, 1j, -1.0, -1j])
    circ = Circuit(2, [custom2(mat, 0, 1)])
    state = random_state(2, 1)
    out = run(circ, state.copy())
    assert np.allclose(out.amps, mat @ state.amps, atol=1e-12)
    # swapping the target order conjugates by SWAP
    swap = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]])
    circ2 = Circuit(2, [custom2(mat, 1, 0)])
    out2 = run(circ2, state.copy())
    assert np.allclose(out2.amps, swap @ mat @ swap @ state.amps, atol=1e-12)


def test_cnot_control_is_first_target():
    out = run(Circuit(2, [x_gate(0), cnot(0, 1)]))
    assert out.amps[0b11] == 1.0
    out = run(Circuit(2, [x_gate(1), cnot(0, 1)]))
    assert out.amps[0b10] == 1.0


def test_fswap_signs():
    out = run(Circuit(2, [x_gate(0), x_gate(1), fswap(0, 1)]))
    assert out.amps[0b11] == -1.0
    out = run(Circuit(2, [x_gate(0), fswap(0, 1)]))
    assert out.amps[0b10] == 1.0


def test_u1_and_global_phase():
    out = run(Circuit(1, [x_gate(0), u1(np.pi / 3, 0)]))
    assert np.allclose(out.amps[1], np.exp(1j * np.pi / 3))
    out = run(Circuit(1, [phase(0.7)]))
    assert np.allclose(out.amps[0], np.exp(0.7j))


def test_dagger_inverts_circuit():
    circ = Circuit(3, [
        u3(0.3, 0.5, -0.2, 0), cnot(0, 2), fswap(1, 2), u1(1.1, 1),
        custom2(gate_matrix(fswap(0, 1)), 0, 2), phase(0.4),
    ])
    state = random_state(3, 2)
    back = run(circ.dagger(), run(circ, state.copy()))
    assert np.max(np.abs(back.amps - state.amps)) < 1e-12


def test_remapped_moves_wires():
    circ = Circuit(2, [x_gate(0), cnot(0, 1)])
    wide = circ.remapped({0: 2, 1: 0}, 3)
    out = run(wide)
    assert out.amps[0b101] == 1.0


def test_unitary_matches_run():
    circ = Circuit(2, [u3(0.4, 0.1, 0.9, 0), cnot(0, 1), u1(0.3, 1)])
    state = random_state(2, 3)
    out = run(circ, state.copy())
    assert np.allclose(circ.unitary() @ state.amps, out.amps, atol=1e-12)


def test_two_qubit_count_ignores_single_wire_gates():
    circ = Circuit(2, [x_gate(0), cnot(0, 1), fswap(0, 1), u1(0.2, 1), phase(0.1)])
    assert circ.two_qubit_count() == 2


def test_run_density_matches_pure_evolution():
    circ = Circuit(2, [u3(0.7, 0.2, 0.4, 0), cnot(0, 1)])
    psi = run(circ)
    rho = run_density(circ)
    assert np.allclose(rho.rho, np.outer(psi.amps, psi.amps.conj()), atol=1e-12)


def test_depol_channel_properties():
    circ = Circuit(2, [x_gate(0), cnot(0, 1)])
    rho = run_density(circ)
    noisy = apply_noise_channel(rho, (0, 1), 0.3)
    assert abs(noisy.trace() - 1.0) < 1e-12
    assert np.allclose(noisy.rho, noisy.rho.conj().T, atol=1e-12)
    purity = float(np.real(np.trace(noisy.rho @ noisy.rho)))
    assert purity < 1.0
    # full twirl lands on the maximally mixed pair state
    flat = apply_noise_channel(rho, (0, 1), 1.0)
    assert np.allclose(flat.rho, np.eye(4) / 4.0, atol=1e-12)


def test_noise_model_applies_after_two_qubit_gates_only():
    clean = Circuit(2, [u3(0.3, 0.1, 0.2, 0)])
    rho = run_density(clean, noise=NoiseModel(depol2=0.2))
    pure = run(clean)
    assert np.allclose(rho.rho, np.outer(pure.amps, pure.amps.conj()), atol=1e-12)
    entangling = Circuit(2, [u3(0.3, 0.1, 0.2, 0), cnot(0, 1)])
    rho2 = run_density(entangling, noise=NoiseModel(depol2=0.2))
    purity = float(np.real(np.trace(rho2.rho @ rho2.rho)))
    assert purity < 1.0 - 1e-6


def test_expect_pauli_values():
    state = PureState.from_bits([1, 0])
    assert expect_pauli(state, {0: "Z"}) == pytest.approx(-1.0)
    assert expect_pauli(state, {1: "Z"}) == pytest.approx(1.0)
    assert expect_pauli(state, {0: "Z", 1: "Z"}) == pytest.approx(-1.0)
    assert expect_pauli(state, {}) == pytest.approx(1.0)
    plus = run(Circuit(1, [u3(np.pi / 2, 0.0, np.pi, 0)]))
    assert expect_pauli(plus, {0: "X"}) == pytest.approx(1.0, abs=1e-12)
    rho = DensityState.from_pure(state)
    assert expect_pauli(rho, {0: "Z", 1: "Z"}) == pytest.approx(-1.0)


def test_sample_pauli_tracks_exact_value():
    circ = Circuit(2, [u3(0.9, 0.0, 0.0, 0), cnot(0, 1)])
    state = run(circ)
    exact = expect_pauli(state, {0: "Z", 1: "Z"})
    shots = 4096
    sampled = sample_pauli(state, {0: "Z", 1: "Z"}, shots, seed=5)
    assert abs(sampled - exact) < 5.0 / np.sqrt(shots)
    assert sample_pauli(state, {0: "Z", 1: "Z"}, shots, seed=5) == sampled
    rho = DensityState.from_pure(state)
    sampled_rho = sample_pauli(rho, {0: "Z", 1: "Z"}, shots, seed=5)
    assert abs(sampled_rho - exact) < 5.0 / np.sqrt(shots)


def test_readout_flips_shrink_expectations():
    state = PureState.from_bits([1, 1])
    noise = NoiseModel(readout_flip=0.5)
    sampled = sample_pauli(state, {0: "Z", 1: "Z"}, 8192, noise=noise, seed=9)
    assert abs(sampled) < 0.1


def test_reduced_density_matrix_against_manual_trace():
    state = random_state(3, 4)
    rho = reduced_density_matrix(state, [0, 2])
    psi = state.amps.reshape(2, 2, 2)  # axes are wires (2, 1, 0)
    manual = np.zeros((4, 4), dtype=complex)
    for a in range(2):
        for c in range(2):
            for ap in range(2):
                for cp in range(2):
                    val = sum(psi[c, b, a] * np.conj(psi[cp, b, ap]) for b in range(2))
                    manual[a + 2 * c, ap + 2 * cp] = val
    assert np.allclose(rho, manual, atol=1e-12)
    assert abs(np.trace(rho) - 1.0) < 1e-12


def test_non_unitary_matrix_rejected():
    with pytest.raises(ValueError):
        custom2(np.ones((4, 4)), 0, 1)
    with pytest.raises(ValueError):
        custom2(np.eye(3), 0, 1)


@settings(max_examples=60, deadline=None)
@given(
    theta=st.floats(-np.pi, np.pi, allow_nan=False),
    phi=st.floats(-np.pi, np.pi, allow_nan=False),
    lam=st.floats(-np.pi, np.pi, allow_nan=False),
    pair=st.sampled_from([(0, 1), (1, 2), (0, 2), (2, 0)]),
    bits=st.lists(st.integers(0, 1), min_size=3, max_size=3),
)
def test_gates_preserve_norm_and_invert(theta, phi, lam, pair, bits):
    circ = Circuit(3, [u3(theta, phi, lam, pair[0]), cnot(*pair), fswap(*pair)])
    state = run(circ, PureState.from_bits(bits))
    assert abs(state.norm() - 1.0) < 1e-12
    back = run(circ.dagger(), state)
    assert abs(abs(back.amps[sum(b << w for w, b in enumerate(bits))]) - 1.0) < 1e-10
