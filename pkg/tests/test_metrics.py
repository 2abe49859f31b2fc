import math

import numpy as np
import pytest

from nhqc_sim.dynamics import EvolutionResult, LogicalChannel
from nhqc_sim.holonomy import single_qubit_unitary, two_qubit_unitary
from nhqc_sim.metrics import (
    FidelityReport,
    average_gate_fidelity_haar,
    channel_leakage,
    gate_fidelity_1q,
    gate_fidelity_2q,
    leakage,
    populations,
    state_fidelity,
)

from conftest import random_density, random_state


def test_state_fidelity_pure_cases(rng):
    psi = random_state(rng, 27)
    assert state_fidelity(np.outer(psi, psi.conj()), psi) == pytest.approx(1.0, abs=1e-12)
    assert state_fidelity(np.eye(27) / 27.0, psi) == pytest.approx(1 / 27, abs=1e-12)
    other = random_state(rng, 27)
    other -= psi * np.vdot(psi, other)
    other /= np.linalg.norm(other)
    assert state_fidelity(np.outer(other, other.conj()), psi) == pytest.approx(0.0, abs=1e-12)


def test_state_fidelity_dimension_mismatch():
    with pytest.raises(ValueError):
        state_fidelity(np.eye(3) / 3.0, np.array([1.0, 0.0]))


def test_gate_fidelity_identity_channel():
    ch = LogicalChannel.identity(2)
    assert gate_fidelity_1q(ch, np.eye(2)) == pytest.approx(1.0, abs=1e-12)
    ch4 = LogicalChannel.identity(4)
    assert gate_fidelity_2q(ch4, np.eye(4), grid=21) == pytest.approx(1.0, abs=1e-12)


def test_gate_fidelity_depolarized_channel():
    # output is the maximally mixed state for every input
    m = np.zeros((4, 4), dtype=complex)
    m[:, 0] = np.eye(2).reshape(-1) / 2
    m[:, 3] = np.eye(2).reshape(-1) / 2
    ch = LogicalChannel(2, m)
    assert gate_fidelity_1q(ch, np.eye(2)) == pytest.approx(0.5, abs=1e-12)
    m4 = np.zeros((16, 16), dtype=complex)
    for i in range(4):
        m4[:, 5 * i] = np.eye(4).reshape(-1) / 4
    assert gate_fidelity_2q(LogicalChannel(4, m4), np.eye(4), grid=11) == pytest.approx(0.25, abs=1e-12)


def test_gate_fidelity_global_phase_invariant(rng):
    u = single_qubit_unitary(0.7, 1.9, 0.3)
    ch = LogicalChannel.from_unitary(u)
    f1 = gate_fidelity_1q(ch, u)
    f2 = gate_fidelity_1q(ch, np.exp(1j * 1.23) * u)
    assert f1 == pytest.approx(f2, abs=1e-14)
    assert f1 == pytest.approx(1.0, abs=1e-12)


def test_gate_fidelity_grid_refinement(rng):
    # smooth channel: the equator average is spectrally exact, so doubling
    # the sample count moves the value at the 1e-6 level at most
    v = 0.97 * single_qubit_unitary(0.4, 2.2, -0.8)
    ch = LogicalChannel.from_state_transfer(v)
    target = single_qubit_unitary(0.5, 2.0, -0.7)
    a = gate_fidelity_1q(ch, target, n_states=1001)
    b = gate_fidelity_1q(ch, target, n_states=2002)
    assert abs(a - b) < 1e-6


def test_gate_fidelity_callable_equals_channel(rng):
    u = two_qubit_unitary(1.2, 0.5)
    ch = LogicalChannel.from_unitary(u)
    fn = lambda psi: np.outer(u @ psi, (u @ psi).conj())
    a = gate_fidelity_2q(ch, u, grid=9)
    b = gate_fidelity_2q(fn, u, grid=9)
    assert a == pytest.approx(b, abs=1e-12)


def test_gate_fidelity_2q_channel_matches_per_state_average(rng):
    # 5x5 brute-force subset oracle
    v = LogicalChannel.from_state_transfer(0.99 * two_qubit_unitary(0.9, 0.1))
    target = two_qubit_unitary(0.9, 0.1)
    grid = 5
    f_channel = gate_fidelity_2q(v, target, grid=grid)
    angles = 2 * np.pi * np.arange(grid) / grid
    acc = 0.0
    for t1 in angles:
        for t2 in angles:
            psi = np.kron([math.cos(t1), math.sin(t1)], [math.cos(t2), math.sin(t2)])
            ideal = target @ psi
            acc += np.real(np.vdot(ideal, v.apply_pure(psi) @ ideal))
    assert f_channel == pytest.approx(acc / grid**2, abs=1e-6)


def test_populations_time_series(rng):
    basis = [np.eye(3)[i].astype(complex) for i in range(3)]
    psi = np.array([1.0, 0.0, 0.0], dtype=complex)
    rho_mixed = np.diag([0.2, 0.5, 0.3]).astype(complex)
    result = EvolutionResult(np.array([0.0, 1.0]), [np.outer(psi, psi), rho_mixed], rho_mixed)
    pops = populations(result, basis)
    np.testing.assert_allclose(pops[0], [1.0, 0.0, 0.0], atol=1e-14)
    np.testing.assert_allclose(pops[1], [0.2, 0.5, 0.3], atol=1e-14)
    assert pops[1].sum() == pytest.approx(1.0)


def test_populations_requires_samples():
    result = EvolutionResult(np.array([]), [], np.eye(2) / 2)
    with pytest.raises(ValueError):
        populations(result, [np.array([1.0, 0.0])])


def test_leakage_values(rng):
    p = np.zeros((4, 4))
    p[0, 0] = p[1, 1] = 1.0
    inside = np.zeros(4, dtype=complex)
    inside[0] = 1.0
    assert leakage(np.outer(inside, inside.conj()), p) == pytest.approx(0.0, abs=1e-12)
    outside = np.zeros(4, dtype=complex)
    outside[3] = 1.0
    assert leakage(np.outer(outside, outside.conj()), p) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        leakage(np.eye(4) / 4, np.diag([0.5, 0, 0, 0]))


def test_channel_leakage(rng):
    assert channel_leakage(LogicalChannel.identity(4)) == pytest.approx(0.0, abs=1e-12)
    lossy = LogicalChannel.from_state_transfer(0.95 * np.eye(2))
    assert channel_leakage(lossy) == pytest.approx(1 - 0.95**2, abs=1e-12)


def test_haar_average_known_values(rng):
    u = single_qubit_unitary(1.0, 0.7, 0.0)
    assert average_gate_fidelity_haar(LogicalChannel.from_unitary(u), u) == pytest.approx(1.0, abs=1e-12)
    # fully depolarizing: <psi|I/d|psi> = 1/d for every input
    m = np.zeros((4, 4), dtype=complex)
    m[:, 0] = np.eye(2).reshape(-1) / 2
    m[:, 3] = np.eye(2).reshape(-1) / 2
    assert average_gate_fidelity_haar(LogicalChannel(2, m), np.eye(2)) == pytest.approx(0.5, abs=1e-12)


def test_fidelity_report_validation():
    FidelityReport(0.99, state_fidelity=0.98, leakage=1e-3)
    with pytest.raises(ValueError):
        FidelityReport(1.1)
    with pytest.raises(ValueError):
        FidelityReport(0.5, leakage=-0.2)


def test_leakage_of_shelving_state():
    from nhqc_sim.hilbert import SubsystemLayout, logical_basis, product_state

    lay = SubsystemLayout(("T1", "T2", "T3", "T4"))
    basis = np.column_stack(logical_basis("S2", lay))
    proj = basis @ basis.conj().T
    shelf = product_state(lay, {"T2": 2})
    assert leakage(np.outer(shelf, shelf.conj()), proj) == pytest.approx(1.0, abs=1e-12)
