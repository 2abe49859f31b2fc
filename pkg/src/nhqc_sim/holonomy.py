"""Analytic holonomic-gate theory and pulse-schedule synthesis.

A gate is one cyclic evolution of the logical subspace: a resonant
exchange Hamiltonian of fixed shape is applied for a total pulse area of
pi, split for some gates into two equal segments with a phase jump at the
midpoint. The logical subspace returns to itself (cyclicity) while never
being coupled to itself through the Hamiltonian (parallel transport), so
the resulting gate is purely geometric.

Basis conventions
-----------------
The single-qubit loop acts on the 8-dim space ``|0/1>_a x {|00>, |01>,
|10>, |11>}_12`` in that order (aux level major). The logical states of
the pair code sit at ``|0>_L = |10>`` (index 2) and ``|1>_L = |01>``
(index 1). Two-qubit gates are written on the logical basis
``{|00>_L, |01>_L, |10>_L, |11>_L}``.

Phase convention: ``phi`` in the gate recipes is the azimuth of the
logical rotation axis. The synthesized drive realizes it with a relative
modulation phase of ``-phi`` between the two arms; with the common
``phi = 0`` gates the distinction is invisible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .model import (
    RAD_NS_PER_MHZ,
    DeviceSpec,
    DriveTone,
    PulseSchedule,
    PulseSegment,
    bessel_j,
    solve_beta_for_ratio,
)

__all__ = [
    "SingleQubitGate",
    "TwoQubitRotGate",
    "ControlledPhaseGate",
    "GateRecipe",
    "gate_to_dict",
    "gate_from_dict",
    "encoding_for",
    "target_unitary",
    "decompose_K",
    "single_loop_hamiltonian",
    "single_loop_propagator",
    "single_qubit_unitary",
    "two_qubit_unitary",
    "controlled_phase_unitary",
    "gate_distance",
    "synth_schedule",
    "check_parallel_transport",
    "check_cyclicity",
]


# ---------------------------------------------------------------------------
# gate recipes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SingleQubitGate:
    """Logical rotation by angle ``gamma`` about the axis (theta, phi)."""

    theta: float
    gamma: float
    phi: float = 0.0

    kind = "single_qubit"

    def params(self) -> dict:
        return {"theta": self.theta, "gamma": self.gamma, "phi": self.phi}


@dataclass(frozen=True)
class TwoQubitRotGate:
    """Controlled rotation in the target-qubit subspace of the pair code."""

    vartheta: float
    varphi: float = 0.0

    kind = "two_qubit_rot"

    def params(self) -> dict:
        return {"vartheta": self.vartheta, "varphi": self.varphi}


@dataclass(frozen=True)
class ControlledPhaseGate:
    """Controlled phase ``diag(1, 1, 1, e^{i xi})``."""

    xi: float

    kind = "controlled_phase"

    def params(self) -> dict:
        return {"xi": self.xi}


GateRecipe = SingleQubitGate | TwoQubitRotGate | ControlledPhaseGate

_KINDS = {
    "single_qubit": SingleQubitGate,
    "two_qubit_rot": TwoQubitRotGate,
    "controlled_phase": ControlledPhaseGate,
}


def gate_to_dict(recipe: GateRecipe) -> dict:
    return {"kind": recipe.kind, "params": recipe.params()}


def gate_from_dict(data: dict) -> GateRecipe:
    kind = data["kind"]
    if kind not in _KINDS:
        raise ValueError(f"unknown gate kind {kind!r}")
    return _KINDS[kind](**data["params"])


def encoding_for(recipe: GateRecipe) -> str:
    return "S1" if isinstance(recipe, SingleQubitGate) else "S2"


def target_unitary(recipe: GateRecipe) -> np.ndarray:
    if isinstance(recipe, SingleQubitGate):
        return single_qubit_unitary(recipe.theta, recipe.gamma, recipe.phi)
    if isinstance(recipe, TwoQubitRotGate):
        return two_qubit_unitary(recipe.vartheta, recipe.varphi)
    if isinstance(recipe, ControlledPhaseGate):
        return controlled_phase_unitary(recipe.xi)
    raise TypeError(f"not a gate recipe: {recipe!r}")


# ---------------------------------------------------------------------------
# loop algebra
# ---------------------------------------------------------------------------


def decompose_K(theta: float, phi: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Factor the 4x4 exchange block ``K`` as ``X Y Z^dag``.

    ``K`` collects the two exchange arms of the single-qubit loop in the
    pair basis ``{|00>, |01>, |10>, |11>}``; ``X`` and ``Z`` are unitary
    and ``Y = diag(0, 0, 1, 1)`` projects on the rotating half of the
    spectrum, which is what makes the loop evolution closed-form.
    """
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    ep, em = np.exp(1j * phi), np.exp(-1j * phi)
    x = np.array(
        [
            [1, 0, 0, 0],
            [0, c, 0, s * em],
            [0, -s * ep, 0, c],
            [0, 0, 1, 0],
        ],
        dtype=complex,
    )
    y = np.diag([0.0, 0.0, 1.0, 1.0]).astype(complex)
    z = np.array(
        [
            [0, 0, 0, 1],
            [0, s * em, c, 0],
            [0, -c, s * ep, 0],
            [1, 0, 0, 0],
        ],
        dtype=complex,
    )
    return x, y, z


def _k_matrix(theta: float, phi: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    k = np.zeros((4, 4), dtype=complex)
    k[1, 0] = s * np.exp(-1j * phi)
    k[2, 0] = c
    k[3, 1] = c
    k[3, 2] = s * np.exp(-1j * phi)
    return k


def single_loop_hamiltonian(theta: float, phi: float, phi1: float, g: float = 1.0) -> np.ndarray:
    """8x8 exchange Hamiltonian generating the single-qubit loop.

    ``g`` is the total angular coupling (rad/ns); ``phi`` follows the
    axis-azimuth convention of this module, so the internal pair phase is
    ``-phi``.
    """
    k = _k_matrix(theta, -phi)
    h = np.zeros((8, 8), dtype=complex)
    h[:4, 4:] = g * k * np.exp(-1j * phi1)
    h[4:, :4] = (g * k * np.exp(-1j * phi1)).conj().T
    return h


def single_loop_propagator(theta: float, phi: float, phi1: float, a_t: float) -> np.ndarray:
    """Closed-form propagator of the single-qubit loop at pulse area ``a_t``.

    Equals ``expm(-i * single_loop_hamiltonian(theta, phi, phi1) * a_t)``;
    at ``a_t = pi`` the off-diagonal (aux-flipping) blocks vanish and the
    loop closes.
    """
    x, y, z = decompose_K(theta, -phi)
    ydiag = np.real(np.diag(y))
    cos_d = np.diag(np.cos(a_t * ydiag)).astype(complex)
    sin_d = np.diag(np.sin(a_t * ydiag)).astype(complex)
    u = np.zeros((8, 8), dtype=complex)
    u[:4, :4] = x @ cos_d @ x.conj().T
    u[:4, 4:] = -1j * np.exp(-1j * phi1) * (x @ sin_d @ z.conj().T)
    u[4:, :4] = -1j * np.exp(1j * phi1) * (z @ sin_d @ x.conj().T)
    u[4:, 4:] = z @ cos_d @ z.conj().T
    return u


def single_qubit_unitary(theta: float, gamma: float, phi: float) -> np.ndarray:
    """Logical single-qubit gate of the closed loop, on ``{|0>_L, |1>_L}``."""
    axis = np.array(
        [
            [math.cos(theta), math.sin(theta) * np.exp(-1j * phi)],
            [math.sin(theta) * np.exp(1j * phi), -math.cos(theta)],
        ],
        dtype=complex,
    )
    return math.cos(gamma / 2) * np.eye(2) - 1j * math.sin(gamma / 2) * axis


def two_qubit_unitary(vartheta: float, varphi: float) -> np.ndarray:
    """Controlled rotation on ``{|00>_L, |01>_L, |10>_L, |11>_L}``."""
    u = np.eye(4, dtype=complex)
    u[2, 2] = math.cos(vartheta)
    u[2, 3] = math.sin(vartheta) * np.exp(1j * varphi)
    u[3, 2] = math.sin(vartheta) * np.exp(-1j * varphi)
    u[3, 3] = -math.cos(vartheta)
    return u


def controlled_phase_unitary(xi: float) -> np.ndarray:
    return np.diag([1.0, 1.0, 1.0, np.exp(1j * xi)]).astype(complex)


def gate_distance(u: np.ndarray, v: np.ndarray) -> float:
    """Global-phase-insensitive gate distance ``1 - |tr(U^dag V)| / dim``."""
    if u.shape != v.shape:
        raise ValueError("gates must have equal dimension")
    return 1.0 - abs(np.trace(u.conj().T @ v)) / u.shape[0]


# ---------------------------------------------------------------------------
# schedule synthesis
# ---------------------------------------------------------------------------


# J_1 rises to its peak at 1.8412 and falls to its first zero at 3.8317;
# both branches are usable operating ranges. Deep drives suppress the
# static and low-order drive sidebands (small J_0, slowly varying J_n), so
# calibration usually lands past the peak; the weak arm is always solved
# on the same branch as the reference so the inversion stays unique.
J1_ZERO_X = 3.8317
BETA_MAX = 3.8


def _solve_beta_descending(ratio: float, beta_ref: float) -> float:
    """Weak-arm depth on the falling branch: J_1(beta) = ratio * J_1(beta_ref)."""
    target = ratio * bessel_j(1, beta_ref)
    lo, hi = beta_ref, J1_ZERO_X
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if bessel_j(1, mid) > target:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-14:
            break
    return 0.5 * (lo + hi)


def _split_arm_depths(ratio_2_over_1: float, beta_ref: float) -> tuple[float, float]:
    """Drive depths whose J_1 weights realize the requested arm ratio.

    The stronger arm runs at ``beta_ref``; the weaker one is solved by
    bisection. A zero ratio switches the corresponding arm off.
    """
    if ratio_2_over_1 == 0.0:
        return beta_ref, 0.0
    ratio = min(ratio_2_over_1, 1.0 / ratio_2_over_1) if ratio_2_over_1 > 1.0 else ratio_2_over_1
    if beta_ref <= 1.8412:
        weak = solve_beta_for_ratio(ratio, beta_ref)
    else:
        weak = _solve_beta_descending(ratio, beta_ref)
    if ratio_2_over_1 <= 1.0:
        return beta_ref, weak
    return weak, beta_ref


def _gate_time_ns(g_total_mhz: float) -> float:
    # pulse area pi: T = pi / (RAD_NS_PER_MHZ * g_total)
    if g_total_mhz <= 0:
        raise ValueError("total effective coupling vanished; gate time is unbounded")
    return math.pi / (RAD_NS_PER_MHZ * g_total_mhz)


def synth_schedule(
    recipe: GateRecipe,
    device: DeviceSpec,
    beta_ref: float,
    phase_offset: float = 0.0,
) -> PulseSchedule:
    """Compile an abstract gate into a drive schedule on the given device.

    Every gate uses a total pulse area of pi. Single-qubit and
    controlled-phase gates split the loop into two equal segments and
    advance the active drive phases by ``pi + gamma`` (resp. ``pi + xi``)
    at the midpoint; the controlled rotation needs a single segment.

    ``phase_offset`` shifts every drive phase by a common amount. The gate
    itself is insensitive to it (only phase differences and jumps matter),
    but the off-resonant transients at the pulse edges are not, so it is a
    calibration knob alongside ``beta_ref``.
    """
    if not 0 < beta_ref <= BETA_MAX:
        raise ValueError(f"beta_ref must lie in (0, {BETA_MAX}]")

    if isinstance(recipe, SingleQubitGate):
        theta = math.fmod(recipe.theta, 2 * math.pi)
        if theta < 0:
            theta += 2 * math.pi
        if theta > math.pi + 1e-12:
            raise ValueError(
                "single-qubit recipes need theta in [0, pi]; fold the axis into phi instead"
            )
        omega_a = device.transmon("Ta").omega
        g1, g2 = device.coupling_g("T1", "Ta"), device.coupling_g("T2", "Ta")
        d1 = device.transmon("T1").omega - omega_a
        d2 = device.transmon("T2").omega - omega_a
        if d1 <= 0 or d2 <= 0:
            raise ValueError("single-qubit synthesis needs omega_1, omega_2 above omega_a")
        want = math.tan(theta / 2) if theta < math.pi else math.inf
        ratio = want * g1 / g2 if want != math.inf else math.inf
        if ratio == math.inf:
            b1, b2 = 0.0, beta_ref
        else:
            b1, b2 = _split_arm_depths(ratio, beta_ref)
        g1p = bessel_j(1, b1) * g1
        g2p = bessel_j(1, b2) * g2
        tau = _gate_time_ns(math.hypot(g1p, g2p))
        phi1, phi2 = phase_offset, phase_offset - recipe.phi
        jump = math.pi + recipe.gamma
        tones_a = (DriveTone("T1", b1 * d1, d1, phi1), DriveTone("T2", b2 * d2, d2, phi2))
        tones_b = (DriveTone("T1", b1 * d1, d1, phi1 + jump), DriveTone("T2", b2 * d2, d2, phi2 + jump))
        return PulseSchedule(
            (PulseSegment(0.0, tau / 2, tones_a), PulseSegment(tau / 2, tau, tones_b))
        )

    if isinstance(recipe, TwoQubitRotGate):
        vt = math.fmod(recipe.vartheta, 2 * math.pi)
        if vt < 0:
            vt += 2 * math.pi
        if vt > math.pi + 1e-12:
            raise ValueError("controlled rotations need vartheta in [0, pi]")
        t2 = device.transmon("T2")
        g23, g24 = device.coupling_g("T2", "T3"), device.coupling_g("T2", "T4")
        nu3 = (t2.omega - device.transmon("T3").omega) - t2.alpha
        nu4 = (t2.omega - device.transmon("T4").omega) - t2.alpha
        if nu3 <= 0 or nu4 <= 0:
            raise ValueError("two-qubit synthesis needs omega_2 - omega_l > alpha_2 for l = 3, 4")
        want = math.tan(vt / 2) if vt < math.pi else math.inf
        # J1(b3)/J1(b4) = tan(vt/2) * g24/g23 realizes the rotation angle
        ratio = want * g24 / g23 if want != math.inf else math.inf
        if ratio == math.inf:
            b4, b3 = 0.0, beta_ref
        else:
            b4, b3 = _split_arm_depths(ratio, beta_ref)
        g23p = math.sqrt(2) * bessel_j(1, b3) * g23
        g24p = math.sqrt(2) * bessel_j(1, b4) * g24
        t_gate = _gate_time_ns(math.hypot(g23p, g24p))
        tones = (
            DriveTone("T3", b3 * nu3, nu3, recipe.varphi + math.pi / 2 + phase_offset),
            DriveTone("T4", b4 * nu4, nu4, -math.pi / 2 + phase_offset),
        )
        return PulseSchedule((PulseSegment(0.0, t_gate, tones),))

    if isinstance(recipe, ControlledPhaseGate):
        t2 = device.transmon("T2")
        g24 = device.coupling_g("T2", "T4")
        nu = (t2.omega - device.transmon("T4").omega) - t2.alpha
        if nu <= 0:
            raise ValueError("controlled-phase synthesis needs omega_2 - omega_4 > alpha_2")
        beta = beta_ref
        g_eff = math.sqrt(2) * bessel_j(1, beta) * g24
        t_gate = _gate_time_ns(g_eff)
        jump = math.pi + recipe.xi
        return PulseSchedule(
            (
                PulseSegment(0.0, t_gate / 2, (DriveTone("T2", beta * nu, nu, phase_offset),)),
                PulseSegment(
                    t_gate / 2, t_gate, (DriveTone("T2", beta * nu, nu, phase_offset + jump),)
                ),
            )
        )

    raise TypeError(f"not a gate recipe: {recipe!r}")


# ---------------------------------------------------------------------------
# holonomy-condition diagnostics
# ---------------------------------------------------------------------------


def _check_projector(p: np.ndarray) -> None:
    if np.max(np.abs(p - p.conj().T)) > 1e-10 or np.max(np.abs(p @ p - p)) > 1e-10:
        raise ValueError("L must be an orthogonal projector")


def check_parallel_transport(
    h_fn: Callable[[float], np.ndarray],
    projector: np.ndarray,
    u_fn: Callable[[float], np.ndarray],
    t_span: tuple[float, float],
    samples: int = 101,
) -> float:
    """Worst sampled violation of the parallel-transport condition.

    Returns ``max_t max(|L H(t) L|, |L U(t)^dag H(t) U(t) L|)`` in
    max-norm; zero means the logical frame never picks up dynamical phase.
    """
    _check_projector(projector)
    t0, t1 = t_span
    worst = 0.0
    for t in np.linspace(t0, t1, samples):
        h = h_fn(t)
        u = u_fn(t)
        worst = max(worst, np.max(np.abs(projector @ h @ projector)))
        rotated = u.conj().T @ h @ u
        worst = max(worst, np.max(np.abs(projector @ rotated @ projector)))
    return float(worst)


def check_cyclicity(u_final: np.ndarray, logical_states: Sequence[np.ndarray]) -> float:
    """Max-norm of the part of ``U_final`` that leaks out of the code space."""
    basis = np.column_stack(logical_states)
    gram = basis.conj().T @ basis
    if np.max(np.abs(gram - np.eye(basis.shape[1]))) > 1e-10:
        raise ValueError("logical states must be orthonormal")
    p = basis @ basis.conj().T
    leak = (np.eye(p.shape[0]) - p) @ u_final @ p
    return float(np.max(np.abs(leak)))
