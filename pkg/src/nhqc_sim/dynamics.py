"""Time evolution: Schrodinger and Lindblad propagation, channel extraction.

The default integrator is a fixed-step classical Runge-Kutta scheme with
the Hamiltonian callback sampled at the stage times, stepped separately
inside every schedule segment so that drive-phase jumps never fall inside
a step. Everything operates on stacked states, so the basis evolutions
needed for channel reconstruction run as one batched integration.

Rates entering :class:`CollapseOp` are angular (rad/ns), matching the
Hamiltonian unit convention; the jump term is the standard form
``rate * (A rho A^dag - (A^dag A rho + rho A^dag A) / 2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .hilbert import SubsystemLayout, check_density_matrix, embed, lowering_op, projector_op
from .model import RAD_NS_PER_MHZ, DeviceSpec, PiecewiseHamiltonian

__all__ = [
    "IntegratorConfig",
    "CollapseOp",
    "EvolutionResult",
    "LogicalChannel",
    "collapse_operators",
    "evolve_schrodinger",
    "evolve_lindblad",
    "schrodinger_evolver",
    "lindblad_evolver",
    "reconstruct_channel",
    "expm_hermitian",
]


@dataclass(frozen=True)
class IntegratorConfig:
    """Integrator selection.

    ``method`` is ``"rk4"`` (fixed step ``dt`` ns, bit-reproducible) or
    ``"adaptive"`` (embedded Runge-Kutta pair with ``rel_tol``/``abs_tol``).
    ``store_every`` samples the state every that many accepted steps;
    zero keeps only the final state.
    """

    method: str = "rk4"
    dt: float = 0.01
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    store_every: int = 0

    def __post_init__(self):
        if self.method not in ("rk4", "adaptive"):
            raise ValueError(f"unknown integrator method {self.method!r}")
        if self.dt <= 0 or self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("dt and tolerances must be positive")
        if self.store_every < 0:
            raise ValueError("store_every must be >= 0")


@dataclass(frozen=True)
class CollapseOp:
    """One Lindblad jump channel: operator plus angular rate (rad/ns)."""

    operator: np.ndarray
    rate: float

    def __post_init__(self):
        if self.rate < 0:
            raise ValueError("collapse rates must be >= 0")


@dataclass
class EvolutionResult:
    """Sampled trajectory; ``final`` is the state at the end of the span."""

    times: np.ndarray
    states: list
    final: np.ndarray


def collapse_operators(device: DeviceSpec, layout: SubsystemLayout) -> list[CollapseOp]:
    """Relaxation and dephasing channels of every transmon.

    For each site and each ladder step ``k``: a relaxation entry
    ``sqrt(k) |k-1><k|`` at angular rate ``2*pi*1e-3*kappa_minus`` and a
    dephasing entry ``k |k><k|`` at ``2*pi*1e-3*kappa_z``. Zero-rate
    entries are kept so the channel count depends only on the geometry.
    """
    ops: list[CollapseOp] = []
    for spec in device.transmons:
        d = spec.levels
        for k in range(1, d):
            relax = math.sqrt(k) * lowering_op(k, d)
            ops.append(CollapseOp(embed(relax, spec.label, layout), RAD_NS_PER_MHZ * spec.kappa_minus))
            dephase = k * projector_op(k, d)
            ops.append(CollapseOp(embed(dephase, spec.label, layout), RAD_NS_PER_MHZ * spec.kappa_z))
    return ops


# ---------------------------------------------------------------------------
# dissipator kernel
# ---------------------------------------------------------------------------


class _DissipatorKernel:
    """Compiled action of a collapse set on batched density matrices.

    Operators that are uniformly scaled partial permutations (every
    relaxation and dephasing channel built here is one) are applied as
    index gathers at O(dim^2) cost; anything else falls back to dense
    matrix products. The anticommutator damping collapses into a single
    diagonal (or dense) rate matrix.
    """

    def __init__(self, collapse: Sequence[CollapseOp], dim: int):
        self.dim = dim
        self.gathers: list[tuple[np.ndarray, np.ndarray, float]] = []
        self.dense: list[tuple[np.ndarray, np.ndarray, float]] = []
        self.g_diag = np.zeros(dim)
        self.g_dense: np.ndarray | None = None
        for op in collapse:
            if op.rate == 0.0:
                continue
            a = np.asarray(op.operator, dtype=complex)
            if a.shape != (dim, dim):
                raise ValueError("collapse operator dimension mismatch")
            rows, cols = np.nonzero(a)
            vals = a[rows, cols]
            uniform = (
                len(rows) > 0
                and len(set(rows.tolist())) == len(rows)
                and len(set(cols.tolist())) == len(cols)
                and np.allclose(vals, vals[0])
            )
            if uniform:
                weight = op.rate * float(abs(vals[0]) ** 2)
                order = np.argsort(cols)
                self.gathers.append((rows[order], cols[order], weight))
                self.g_diag[cols] += 0.5 * weight
            else:
                self.dense.append((a, a.conj().T, op.rate))
                contrib = 0.5 * op.rate * (a.conj().T @ a)
                self.g_dense = contrib if self.g_dense is None else self.g_dense + contrib

    @property
    def active(self) -> bool:
        return bool(self.gathers or self.dense)

    def add_to(self, rho: np.ndarray, out: np.ndarray) -> None:
        """Accumulate the dissipator of ``rho`` (batched ``(..., d, d)``) into ``out``."""
        for rows, cols, weight in self.gathers:
            out[..., rows[:, None], rows[None, :]] += weight * rho[..., cols[:, None], cols[None, :]]
        if np.any(self.g_diag):
            out -= self.g_diag[:, None] * rho
            out -= rho * self.g_diag[None, :]
        for a, a_dag, rate in self.dense:
            out += rate * (a @ rho @ a_dag)
        if self.g_dense is not None:
            out -= self.g_dense @ rho
            out -= rho @ self.g_dense


# ---------------------------------------------------------------------------
# steppers
# ---------------------------------------------------------------------------


def _resolve_pieces(
    h_fn, t_span: tuple[float, float], breakpoints: Sequence[float] | None
) -> list[tuple[float, float, Callable[[float], np.ndarray]]]:
    """Split the integration span at schedule boundaries."""
    t0, t1 = t_span
    if not t1 > t0:
        raise ValueError("t_span must have positive duration")
    if isinstance(h_fn, PiecewiseHamiltonian):
        pieces = []
        for a, b, fn in h_fn.pieces:
            lo, hi = max(a, t0), min(b, t1)
            if hi > lo + 1e-12:
                pieces.append((lo, hi, fn))
        if not pieces or abs(pieces[0][0] - t0) > 1e-9 or abs(pieces[-1][1] - t1) > 1e-9:
            raise ValueError("t_span is not covered by the piecewise Hamiltonian")
        return pieces
    cuts = sorted({t0, t1, *(b for b in (breakpoints or ()) if t0 < b < t1)})
    return [(a, b, h_fn) for a, b in zip(cuts, cuts[1:])]


def _rk4_run(rhs_for, y0, pieces, cfg: IntegratorConfig, record):
    """Fixed-step RK4 over the resolved pieces; ``record`` collects samples."""
    y = y0.copy()
    step_idx = 0
    record(pieces[0][0], y, force=True)
    for a, b, fn in pieces:
        rhs = rhs_for(fn)
        n = max(1, math.ceil((b - a) / cfg.dt - 1e-12))
        h = (b - a) / n
        t = a
        for _ in range(n):
            k1 = rhs(t, y)
            k2 = rhs(t + 0.5 * h, y + (0.5 * h) * k1)
            k3 = rhs(t + 0.5 * h, y + (0.5 * h) * k2)
            k4 = rhs(t + h, y + h * k3)
            y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            t += h
            step_idx += 1
            if cfg.store_every and step_idx % cfg.store_every == 0:
                record(t, y)
        # land exactly on the boundary for the next piece
    record(pieces[-1][1], y, force=True)
    return y


def _adaptive_run(rhs_for, y0, pieces, cfg: IntegratorConfig, record):
    from scipy.integrate import solve_ivp

    shape = y0.shape
    y = y0.copy()
    record(pieces[0][0], y, force=True)
    for a, b, fn in pieces:
        rhs = rhs_for(fn)

        def flat_rhs(t, yv):
            return rhs(t, yv.reshape(shape)).ravel()

        sol = solve_ivp(
            flat_rhs,
            (a, b),
            y.ravel(),
            method="RK45",
            rtol=cfg.rel_tol,
            atol=cfg.abs_tol,
        )
        if not sol.success:
            raise RuntimeError(f"adaptive integration failed: {sol.message}")
        y = sol.y[:, -1].reshape(shape)
    record(pieces[-1][1], y, force=True)
    return y


class _Recorder:
    def __init__(self, enabled: bool, extract):
        self.enabled = enabled
        self.extract = extract
        self.times: list[float] = []
        self.states: list = []

    def __call__(self, t, y, force=False):
        if not (self.enabled or force):
            return
        if self.times and t <= self.times[-1] + 1e-12:
            return
        self.times.append(t)
        if self.enabled:
            self.states.append(self.extract(y))


def _run(rhs_for, y0, h_fn, t_span, cfg, breakpoints, extract):
    pieces = _resolve_pieces(h_fn, t_span, breakpoints)
    rec = _Recorder(cfg.store_every > 0, extract)
    runner = _rk4_run if cfg.method == "rk4" else _adaptive_run
    y = runner(rhs_for, y0, pieces, cfg, rec)
    return y, EvolutionResult(np.array(rec.times), rec.states, extract(y))


# ---------------------------------------------------------------------------
# public evolution API
# ---------------------------------------------------------------------------


def evolve_schrodinger(
    h_fn,
    psi0: np.ndarray,
    t_span: tuple[float, float],
    config: IntegratorConfig = IntegratorConfig(),
    breakpoints: Sequence[float] | None = None,
) -> EvolutionResult:
    """Propagate a pure state under ``h_fn(t)`` (rad/ns)."""
    psi0 = np.asarray(psi0, dtype=complex)
    if abs(np.linalg.norm(psi0) - 1.0) > 1e-10:
        raise ValueError("initial state must be normalized")

    def rhs_for(fn):
        def rhs(t, y):
            return -1j * (fn(t) @ y)

        return rhs

    _, result = _run(rhs_for, psi0[:, None], h_fn, t_span, config, breakpoints, lambda y: y[:, 0].copy())
    return result


def schrodinger_evolver(
    h_fn,
    t_span: tuple[float, float],
    config: IntegratorConfig = IntegratorConfig(),
    breakpoints: Sequence[float] | None = None,
) -> Callable[[np.ndarray], np.ndarray]:
    """Batched pure-state propagator: maps kets ``(d, m)`` to final kets."""

    def rhs_for(fn):
        def rhs(t, y):
            return -1j * (fn(t) @ y)

        return rhs

    def evolve(kets: np.ndarray) -> np.ndarray:
        y, _ = _run(rhs_for, np.asarray(kets, dtype=complex), h_fn, t_span, config, breakpoints, lambda y: y)
        return y

    return evolve


def _lindblad_rhs_factory(kernel: _DissipatorKernel):
    def rhs_for(fn):
        def rhs(t, y):
            h = fn(t)
            out = np.matmul(h, y)
            out -= np.matmul(y, h)
            out *= -1j
            if kernel.active:
                kernel.add_to(y, out)
            return out

        return rhs

    return rhs_for


def evolve_lindblad(
    h_fn,
    rho0: np.ndarray,
    collapse: Sequence[CollapseOp],
    t_span: tuple[float, float],
    config: IntegratorConfig = IntegratorConfig(),
    breakpoints: Sequence[float] | None = None,
) -> EvolutionResult:
    """Propagate a density matrix under ``h_fn`` with the given jump channels."""
    rho0 = check_density_matrix(rho0, tol=1e-9, eig_tol=-1e-9)
    kernel = _DissipatorKernel(collapse, rho0.shape[0])
    rhs_for = _lindblad_rhs_factory(kernel)
    _, result = _run(
        rhs_for, rho0[None, :, :], h_fn, t_span, config, breakpoints, lambda y: y[0].copy()
    )
    return result


def lindblad_evolver(
    h_fn,
    collapse: Sequence[CollapseOp],
    dim: int,
    t_span: tuple[float, float],
    config: IntegratorConfig = IntegratorConfig(),
    breakpoints: Sequence[float] | None = None,
) -> Callable[[np.ndarray], np.ndarray]:
    """Batched Lindblad propagator: maps ``(m, d, d)`` stacks to final stacks."""
    kernel = _DissipatorKernel(collapse, dim)
    rhs_for = _lindblad_rhs_factory(kernel)

    def evolve(rho_batch: np.ndarray) -> np.ndarray:
        rho_batch = np.asarray(rho_batch, dtype=complex)
        y, _ = _run(rhs_for, rho_batch, h_fn, t_span, config, breakpoints, lambda y: y)
        return y

    return evolve


# ---------------------------------------------------------------------------
# logical-channel reconstruction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LogicalChannel:
    """Completely positive map on the logical subspace.

    ``matrix`` acts on row-major vectorized logical density matrices:
    ``vec(E(rho)) = matrix @ vec(rho)``.
    """

    dim: int
    matrix: np.ndarray

    def apply(self, rho: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        if rho.shape != (self.dim, self.dim):
            raise ValueError(f"expected a {self.dim}x{self.dim} density matrix")
        return (self.matrix @ rho.reshape(-1)).reshape(self.dim, self.dim)

    def apply_pure(self, psi: np.ndarray) -> np.ndarray:
        psi = np.asarray(psi, dtype=complex)
        return self.apply(np.outer(psi, psi.conj()))

    @classmethod
    def identity(cls, dim: int) -> "LogicalChannel":
        return cls(dim, np.eye(dim * dim, dtype=complex))

    @classmethod
    def from_state_transfer(cls, transfer: np.ndarray) -> "LogicalChannel":
        """Channel ``rho -> T rho T^dag`` of a (possibly leaky) transfer matrix."""
        t = np.asarray(transfer, dtype=complex)
        return cls(t.shape[0], np.kron(t, t.conj()))

    @classmethod
    def from_unitary(cls, u: np.ndarray) -> "LogicalChannel":
        return cls.from_state_transfer(u)


def reconstruct_channel(
    evolve_fn: Callable[[np.ndarray], np.ndarray],
    logical_states: Sequence[np.ndarray],
) -> LogicalChannel:
    """Reconstruct the logical-subspace map of a linear evolution.

    ``evolve_fn`` must map a stack of full-space density matrices
    ``(m, D, D)`` to their evolved versions and be linear in the input.
    The channel is assembled from ``d^2`` basis evolutions: the ``d``
    logical populations plus real and imaginary superpositions of every
    pair, all of which are valid density matrices.
    """
    basis = np.column_stack([np.asarray(s, dtype=complex) for s in logical_states])
    d = basis.shape[1]
    gram = basis.conj().T @ basis
    if np.max(np.abs(gram - np.eye(d))) > 1e-9:
        raise ValueError("logical states must be orthonormal")

    inputs = []
    pair_slots = {}
    for i in range(d):
        inputs.append(np.outer(basis[:, i], basis[:, i].conj()))
    for i in range(d):
        for j in range(i + 1, d):
            plus = (basis[:, i] + basis[:, j]) / math.sqrt(2)
            imag = (basis[:, i] + 1j * basis[:, j]) / math.sqrt(2)
            pair_slots[(i, j)] = len(inputs)
            inputs.append(np.outer(plus, plus.conj()))
            inputs.append(np.outer(imag, imag.conj()))

    finals = evolve_fn(np.stack(inputs))
    # restrict to the logical block
    restricted = np.einsum("Di,mDE,Ej->mij", basis.conj(), np.asarray(finals), basis, optimize=True)

    matrix = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        matrix[:, i * d + i] = restricted[i].reshape(-1)
    for (i, j), slot in pair_slots.items():
        avg = 0.5 * (restricted[i] + restricted[j])
        e_ij = (restricted[slot] - avg) + 1j * (restricted[slot + 1] - avg)
        matrix[:, i * d + j] = e_ij.reshape(-1)
        matrix[:, j * d + i] = e_ij.conj().T.reshape(-1)
    return LogicalChannel(d, matrix)


def expm_hermitian(h: np.ndarray, t: float) -> np.ndarray:
    """Unitary ``exp(-i H t)`` of a Hermitian ``H`` via eigendecomposition."""
    vals, vecs = np.linalg.eigh(h)
    return (vecs * np.exp(-1j * vals * t)) @ vecs.conj().T
