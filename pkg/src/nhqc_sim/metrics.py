"""Fidelity and population observables.

Gate fidelities follow the real-superposition input convention: the
single-qubit average runs over ``cos(t)|0>_L + sin(t)|1>_L`` with ``t``
equispaced on the circle, the two-qubit average over the corresponding
product states on a tensor grid. Both integrands are low-order
trigonometric polynomials, so the equispaced means are spectrally exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .dynamics import EvolutionResult, LogicalChannel

__all__ = [
    "FidelityReport",
    "state_fidelity",
    "gate_fidelity_1q",
    "gate_fidelity_2q",
    "populations",
    "leakage",
    "channel_leakage",
    "average_gate_fidelity_haar",
]


@dataclass(frozen=True)
class FidelityReport:
    """Summary of one gate evaluation."""

    gate_fidelity: float
    state_fidelity: float | None = None
    leakage: float = 0.0
    per_state_values: np.ndarray | None = None

    def __post_init__(self):
        if not -1e-9 <= self.gate_fidelity <= 1 + 1e-9:
            raise ValueError(f"gate fidelity {self.gate_fidelity} outside [0, 1]")
        if self.leakage < -1e-9:
            raise ValueError("leakage must be >= 0")


def state_fidelity(rho: np.ndarray, target: np.ndarray) -> float:
    """Overlap ``<psi|rho|psi>`` of a state (matrix or ket) with a pure target."""
    target = np.asarray(target, dtype=complex)
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim == 1:
        if rho.shape != target.shape:
            raise ValueError("state dimensions do not match")
        return float(np.clip(abs(np.vdot(target, rho)) ** 2, 0.0, 1.0))
    if rho.shape != (target.size, target.size):
        raise ValueError("state dimensions do not match")
    val = np.real(np.vdot(target, rho @ target))
    return float(np.clip(val, 0.0, 1.0))


def _state_map(channel_or_evolver) -> Callable[[np.ndarray], np.ndarray]:
    """Normalize the channel argument to ``pure logical ket -> final rho_L``."""
    if isinstance(channel_or_evolver, LogicalChannel):
        return channel_or_evolver.apply_pure
    if callable(channel_or_evolver):
        return channel_or_evolver
    raise TypeError("expected a LogicalChannel or a callable state map")


def _input_family_1q(n_states: int) -> np.ndarray:
    angles = 2 * np.pi * np.arange(n_states) / n_states
    return np.stack([np.cos(angles), np.sin(angles)], axis=1).astype(complex)


def gate_fidelity_1q(channel_or_evolver, target: np.ndarray, n_states: int = 1001) -> float:
    """Average fidelity of a logical qubit map over the equator family."""
    if n_states < 2:
        raise ValueError("n_states must be >= 2")
    target = np.asarray(target, dtype=complex)
    if target.shape != (2, 2):
        raise ValueError("single-qubit target must be 2x2")
    return _averaged_fidelity(channel_or_evolver, target, _input_family_1q(n_states))


def gate_fidelity_2q(channel_or_evolver, target: np.ndarray, grid: int = 101) -> float:
    """Average fidelity of a two-qubit logical map over real product states."""
    if grid < 2:
        raise ValueError("grid must be >= 2")
    target = np.asarray(target, dtype=complex)
    if target.shape != (4, 4):
        raise ValueError("two-qubit target must be 4x4")
    singles = _input_family_1q(grid)
    # row-major tensor grid over (t1, t2)
    psis = np.einsum("ai,bj->abij", singles, singles).reshape(grid * grid, 2, 2)
    psis = psis.reshape(grid * grid, 4)
    return _averaged_fidelity(channel_or_evolver, target, psis)


def _averaged_fidelity(channel_or_evolver, target: np.ndarray, psis: np.ndarray) -> float:
    ideal = psis @ target.T  # row k holds target @ psis[k]
    if isinstance(channel_or_evolver, LogicalChannel):
        d = target.shape[0]
        vecs = np.einsum("ni,nj->nij", psis, psis.conj()).reshape(len(psis), d * d)
        outs = (channel_or_evolver.matrix @ vecs.T).T.reshape(len(psis), d, d)
        vals = np.real(np.einsum("ni,nij,nj->n", ideal.conj(), outs, ideal, optimize=True))
    else:
        fn = _state_map(channel_or_evolver)
        vals = np.array([np.real(np.vdot(f, fn(p) @ f)) for p, f in zip(psis, ideal)])
    return float(np.mean(np.clip(vals, 0.0, 1.0)))


def populations(result: EvolutionResult, basis: Sequence[np.ndarray]) -> np.ndarray:
    """Time series ``<b|rho(t)|b>`` for each basis state; shape (n_times, n_basis)."""
    if not result.states:
        raise ValueError("the evolution stored no intermediate states")
    out = np.zeros((len(result.states), len(basis)))
    for col, b in enumerate(basis):
        b = np.asarray(b, dtype=complex)
        for row, state in enumerate(result.states):
            state = np.asarray(state)
            if state.shape != ((b.size, b.size) if state.ndim == 2 else b.shape):
                raise ValueError("basis dimension does not match the stored states")
            if state.ndim == 1:
                out[row, col] = abs(np.vdot(b, state)) ** 2
            else:
                out[row, col] = np.real(np.vdot(b, state @ b))
    return out


def leakage(rho: np.ndarray, logical_projector: np.ndarray) -> float:
    """Population outside the logical subspace, ``1 - tr(P rho P)``."""
    p = np.asarray(logical_projector, dtype=complex)
    if np.max(np.abs(p @ p - p)) > 1e-10 or np.max(np.abs(p - p.conj().T)) > 1e-10:
        raise ValueError("logical_projector must be an orthogonal projector")
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim == 1:
        kept = np.real(np.vdot(rho, p @ rho))
    else:
        kept = np.real(np.trace(p @ rho @ p))
    return float(max(0.0, 1.0 - kept))


def channel_leakage(channel: LogicalChannel) -> float:
    """Average trace loss of a channel, probed with the maximally mixed state."""
    mixed = np.eye(channel.dim) / channel.dim
    return float(max(0.0, 1.0 - np.real(np.trace(channel.apply(mixed)))))


def average_gate_fidelity_haar(channel: LogicalChannel, target: np.ndarray) -> float:
    """Haar-averaged gate fidelity (diagnostic; the sweeps use the real families)."""
    target = np.asarray(target, dtype=complex)
    d = channel.dim
    if target.shape != (d, d):
        raise ValueError("target dimension does not match the channel")
    ideal = LogicalChannel.from_unitary(target).matrix
    overlap = np.real(np.trace(ideal.conj().T @ channel.matrix))
    return float((overlap / d + 1.0) / (d + 1.0))
