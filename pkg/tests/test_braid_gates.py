"""Braiding gates and the z/x consistency checks."""

import numpy as np
import pytest
import scipy.linalg

from braidkit.braid_gates import (
    BondBraidCircuit,
    inter_braid_circuit,
    inter_braid_matrix,
    intra_braid_gates,
    intra_braid_matrix,
    verify_x_constraint,
    verify_z_constraint,
    z_bond_braiding,
)
from braidkit.sv_core import Circuit

YY = np.kron(np.array([[0, -1j], [1j, 0]]), np.array([[0, -1j], [1j, 0]]))


def test_inter_braid_is_yy_rotation():
    expected = scipy.linalg.expm(-1j * (np.pi / 4.0) * YY)
    assert np.max(np.abs(inter_braid_matrix(1) - expected)) < 1e-12
    expected_minus = scipy.linalg.expm(1j * (np.pi / 4.0) * YY)
    assert np.max(np.abs(inter_braid_matrix(-1) - expected_minus)) < 1e-12


def test_inter_braid_circuit_matches_matrix_exactly():
    for sign in (1, -1):
        circ = inter_braid_circuit(sign)
        assert np.max(np.abs(circ.unitary() - inter_braid_matrix(sign))) < 1e-12
    # two entangling gates, per the published decomposition
    assert sum(1 for g in inter_braid_circuit(1).gates if g.kind == "CNOT") == 2


def test_braiding_is_anyonic():
    b = inter_braid_matrix(1)
    # a squared exchange is still nontrivial; only the eighth power closes
    assert np.max(np.abs(np.linalg.matrix_power(b, 2) - np.eye(4))) > 0.5
    assert np.max(np.abs(np.linalg.matrix_power(b, 4) + np.eye(4))) < 1e-12
    assert np.max(np.abs(np.linalg.matrix_power(b, 8) - np.eye(4))) < 1e-12


def test_plus_minus_are_adjoint():
    assert np.max(np.abs(inter_braid_matrix(1) @ inter_braid_matrix(-1) - np.eye(4))) < 1e-12
    assert np.max(np.abs(intra_braid_matrix(1) @ intra_braid_matrix(-1) - np.eye(2))) < 1e-12
    intra = Circuit(1)
    intra.extend(intra_braid_gates(1, 0))
    assert np.max(np.abs(intra.unitary() - intra_braid_matrix(1))) < 1e-12


def test_braid_gates_preserve_parity_blocks():
    mat = inter_braid_matrix(1)
    # even block {|00>, |11>} = indices {0, 3}; odd block = {1, 2}
    for row, col in [(0, 1), (0, 2), (3, 1), (3, 2), (1, 0), (2, 0), (1, 3), (2, 3)]:
        assert abs(mat[row, col]) < 1e-14


def test_z_bond_superposition_structure():
    unitary = z_bond_braiding(1).circuit.unitary()
    col00 = unitary[:, 0]
    # |00> maps into the even-parity block only
    assert abs(col00[1]) < 1e-12 and abs(col00[2]) < 1e-12
    assert abs(col00[0]) == pytest.approx(1 / np.sqrt(2), abs=1e-12)
    assert abs(col00[3]) == pytest.approx(1 / np.sqrt(2), abs=1e-12)
    # alpha_{01}^{01} = +i/sqrt(2) branch: input |01> = n_f=0, n_g=1 -> index 2
    col01 = unitary[:, 2]
    assert col01[2] == pytest.approx(1j / np.sqrt(2), abs=1e-12)
    assert col01[1] == pytest.approx(-1j / np.sqrt(2), abs=1e-12)
    # alpha_{11}^{11} imaginary as well
    col11 = unitary[:, 3]
    assert col11[3].real == pytest.approx(0.0, abs=1e-12)
    assert abs(col11[3]) == pytest.approx(1 / np.sqrt(2), abs=1e-12)


def test_verify_z_assigns_flux_by_gauge_occupation():
    for n_g, expected_d in ((1, 1), (0, -1)):
        report = verify_z_constraint(z_bond_braiding(n_g))
        assert report.ok
        assert report.d_by_ng[n_g] == expected_d
    report = verify_z_constraint(z_bond_braiding(1))
    assert report.d_by_ng == {1: 1, 0: -1}


def test_verify_z_rejects_identity():
    report = verify_z_constraint(Circuit(2))
    assert not report.ok
    assert report.message


def test_verify_x_passes_for_braiding_pair():
    pair = (z_bond_braiding(1), z_bond_braiding(1))
    report = verify_x_constraint(pair)
    assert report.ok
    assert report.max_dev < 1e-10


def mutant_intra_first() -> BondBraidCircuit:
    # both intra-braidings applied before the inter-braiding
    circ = Circuit(2)
    circ.extend(intra_braid_gates(-1, 0))
    circ.extend(intra_braid_gates(-1, 0))
    circ.extend(inter_braid_circuit(1, 0, 1).gates)
    return BondBraidCircuit(circ, 1)


def mutant_intra_on_gauge_wire() -> BondBraidCircuit:
    # intra-braidings moved onto the second (gauge) qubit
    circ = Circuit(2)
    circ.extend(intra_braid_gates(-1, 1))
    circ.extend(inter_braid_circuit(1, 0, 1).gates)
    circ.extend(intra_braid_gates(-1, 1))
    return BondBraidCircuit(circ, 1)


def test_verify_x_fails_for_both_mutants():
    for make in (mutant_intra_first, mutant_intra_on_gauge_wire):
        pair = (make(), make())
        report = verify_x_constraint(pair)
        assert not report.ok
        assert report.max_dev > 1e-2
        assert report.message


def test_mutants_still_pass_the_z_check():
    # the z-bond term is diagonal, so misplaced intra-braidings slip through;
    # only the x check catches them
    for make in (mutant_intra_first, mutant_intra_on_gauge_wire):
        assert verify_z_constraint(make()).ok


def test_input_validation():
    with pytest.raises(ValueError):
        z_bond_braiding(2)
    with pytest.raises(ValueError):
        intra_braid_gates(0, 0)
    with pytest.raises(ValueError):
        inter_braid_circuit(3)
