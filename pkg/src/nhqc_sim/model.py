"""Device model for capacitively coupled, flux-modulated transmons.

The transmons are weakly anharmonic qudits (three levels by default) on a
lattice with fixed pair couplings. Modulating a transmon's frequency as
``omega(t) = omega + eps * sin(nu*t + phi)`` turns each coupling matrix
element into a phase-modulated tone whose harmonic content is weighted by
Bessel functions of the drive depth ``beta = eps / nu``. All dynamics in
this package run in the rotating frame of the instantaneous single-site
energies, where the couplings keep their magnitude and acquire those
oscillating phase factors exactly (no harmonic truncation).

Units
-----
* frequencies (``omega``, ``alpha``, ``nu``, ``eps``, ``g``, decay rates)
  are ordinary frequencies in MHz,
* times are in ns,
* phases are in radians,
* Hamiltonian matrices are angular frequencies in rad/ns, i.e. a matrix
  element of ``x`` MHz enters as ``2*pi*1e-3*x``. The conversion happens
  only inside Hamiltonian assembly.
"""

from __future__ import annotations

import json
import math
from bisect import bisect_right
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .hilbert import SubsystemLayout, annihilation_op, embed

__all__ = [
    "RAD_NS_PER_MHZ",
    "J1_PEAK_X",
    "RESONANCE_TOL_MHZ",
    "TransmonSpec",
    "Coupling",
    "DeviceSpec",
    "DriveTone",
    "PulseSegment",
    "PulseSchedule",
    "PiecewiseHamiltonian",
    "static_hamiltonian",
    "coupling_matrix",
    "frame_phases",
    "lab_hamiltonian",
    "lab_schedule_hamiltonian",
    "schedule_hamiltonian",
    "interaction_hamiltonian",
    "jacobi_anger_hamiltonian",
    "bessel_j",
    "solve_beta_for_ratio",
    "effective_hamiltonian",
    "device_to_dict",
    "device_from_dict",
    "schedule_to_dict",
    "schedule_from_dict",
]

# rad/ns per MHz of ordinary frequency
RAD_NS_PER_MHZ = 2.0e-3 * math.pi

# location of the first maximum of J_1; drive depths are kept at or below
# this point so that J_1(beta) is invertible
J1_PEAK_X = 1.8412

# drives further than this from their resonance condition are rejected by
# effective_hamiltonian (diagnostic aid; the exact dynamics never needs it)
RESONANCE_TOL_MHZ = 0.01


# ---------------------------------------------------------------------------
# device and schedule data
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TransmonSpec:
    """One transmon: bare frequency, anharmonicity and decoherence rates.

    ``omega`` is the 0-1 transition frequency in MHz, ``alpha`` the
    anharmonicity in MHz (the 1-2 transition sits at ``omega - alpha``).
    ``kappa_minus`` and ``kappa_z`` are the relaxation and pure-dephasing
    rates in MHz.
    """

    label: str
    omega: float
    alpha: float
    levels: int = 3
    kappa_minus: float = 0.0
    kappa_z: float = 0.0

    def __post_init__(self):
        if self.omega <= 0:
            raise ValueError(f"transmon {self.label!r}: omega must be positive")
        if self.alpha <= 0:
            raise ValueError(f"transmon {self.label!r}: alpha must be positive")
        if self.levels < 2:
            raise ValueError(f"transmon {self.label!r}: needs at least 2 levels")
        if self.kappa_minus < 0 or self.kappa_z < 0:
            raise ValueError(f"transmon {self.label!r}: decoherence rates must be >= 0")


@dataclass(frozen=True)
class Coupling:
    """Fixed exchange coupling of strength ``g`` (MHz) between two transmons."""

    a: str
    b: str
    g: float

    def __post_init__(self):
        if self.a == self.b:
            raise ValueError(f"coupling endpoints must differ, got {self.a!r} twice")
        if self.g < 0:
            raise ValueError("coupling strength must be >= 0")

    @property
    def pair(self) -> frozenset:
        return frozenset((self.a, self.b))


@dataclass(frozen=True)
class DeviceSpec:
    """A transmon lattice: site specs plus the coupling graph."""

    transmons: tuple[TransmonSpec, ...]
    couplings: tuple[Coupling, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "transmons", tuple(self.transmons))
        object.__setattr__(self, "couplings", tuple(self.couplings))
        labels = [t.label for t in self.transmons]
        if len(set(labels)) != len(labels):
            raise ValueError("duplicate transmon labels")
        pairs = set()
        for c in self.couplings:
            for end in (c.a, c.b):
                if end not in labels:
                    raise ValueError(f"coupling references undeclared transmon {end!r}")
            if c.pair in pairs:
                raise ValueError(f"more than one coupling between {c.a!r} and {c.b!r}")
            pairs.add(c.pair)

    def transmon(self, label: str) -> TransmonSpec:
        for t in self.transmons:
            if t.label == label:
                return t
        raise ValueError(f"device has no transmon {label!r}")

    def coupling_g(self, a: str, b: str) -> float:
        want = frozenset((a, b))
        for c in self.couplings:
            if c.pair == want:
                return c.g
        raise ValueError(f"device has no coupling between {a!r} and {b!r}")

    def layout(self) -> SubsystemLayout:
        return SubsystemLayout(
            tuple(t.label for t in self.transmons),
            tuple(t.levels for t in self.transmons),
        )

    def with_transmon(self, label: str, **changes) -> "DeviceSpec":
        """Copy of the device with one transmon's fields replaced."""
        self.transmon(label)
        new = tuple(replace(t, **changes) if t.label == label else t for t in self.transmons)
        return DeviceSpec(new, self.couplings)

    def with_uniform_rates(self, kappa_minus: float, kappa_z: float) -> "DeviceSpec":
        new = tuple(replace(t, kappa_minus=kappa_minus, kappa_z=kappa_z) for t in self.transmons)
        return DeviceSpec(new, self.couplings)


@dataclass(frozen=True)
class DriveTone:
    """Sinusoidal frequency modulation of one transmon.

    ``eps`` is the modulation amplitude and ``nu`` the modulation frequency,
    both MHz; ``phi`` is the modulation phase in radians. The derived drive
    depth is ``beta = eps / nu``.
    """

    target: str
    eps: float
    nu: float
    phi: float = 0.0

    def __post_init__(self):
        if self.eps < 0:
            raise ValueError("tone amplitude eps must be >= 0")
        if self.eps > 0 and self.nu <= 0:
            raise ValueError(f"tone on {self.target!r}: nu must be positive when eps > 0")

    @property
    def beta(self) -> float:
        return self.eps / self.nu if self.eps > 0 else 0.0


@dataclass(frozen=True)
class PulseSegment:
    """Tones active on [t_start, t_end] ns; at most one tone per transmon."""

    t_start: float
    t_end: float
    tones: tuple[DriveTone, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "tones", tuple(self.tones))
        if not self.t_end > self.t_start:
            raise ValueError("segment must have positive duration")
        targets = [t.target for t in self.tones]
        if len(set(targets)) != len(targets):
            raise ValueError("at most one tone per transmon per segment")

    def tone_for(self, label: str) -> DriveTone | None:
        for t in self.tones:
            if t.target == label:
                return t
        return None


@dataclass(frozen=True)
class PulseSchedule:
    """Contiguous drive segments covering [0, total_time] ns.

    Phase jumps are encoded as a new segment whose tones carry the advanced
    phases; the controller is assumed to retarget the modulation phase at
    the boundary.
    """

    segments: tuple[PulseSegment, ...]

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        if not self.segments:
            raise ValueError("schedule needs at least one segment")
        if abs(self.segments[0].t_start) > 0:
            raise ValueError("first segment must start at t = 0")
        for prev, cur in zip(self.segments, self.segments[1:]):
            if abs(cur.t_start - prev.t_end) > 1e-12:
                raise ValueError("segments must be contiguous and non-overlapping")

    @property
    def total_time(self) -> float:
        return self.segments[-1].t_end

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return tuple(s.t_start for s in self.segments) + (self.total_time,)

    def segment_at(self, t: float) -> int:
        if t < 0 or t > self.total_time + 1e-9:
            raise ValueError(f"t={t} ns lies outside the schedule [0, {self.total_time}]")
        starts = [s.t_start for s in self.segments]
        return min(bisect_right(starts, t) - 1, len(self.segments) - 1)


# ---------------------------------------------------------------------------
# Hamiltonian assembly
# ---------------------------------------------------------------------------


def _check_layout(device: DeviceSpec, layout: SubsystemLayout) -> None:
    dev_labels = set(t.label for t in device.transmons)
    if dev_labels != set(layout.labels):
        raise ValueError(
            f"layout sites {sorted(layout.labels)} do not match device transmons {sorted(dev_labels)}"
        )
    for t in device.transmons:
        if layout.dim_of(t.label) != t.levels:
            raise ValueError(f"layout dimension for {t.label!r} does not match its level count")


def _level_energies(spec: TransmonSpec) -> np.ndarray:
    """Ladder energies [k*omega - (k-1)*alpha] in rad/ns, k = 0..levels-1."""
    k = np.arange(spec.levels)
    return RAD_NS_PER_MHZ * (k * spec.omega - np.clip(k - 1, 0, None) * spec.alpha)


def coupling_matrix(device: DeviceSpec, layout: SubsystemLayout) -> np.ndarray:
    """Exchange part ``sum_ij g_ij (S_i S_j^dag + h.c.)`` in rad/ns.

    ``S`` is the sqrt(k)-weighted lowering ladder of each site, so the
    single-step elements carry the usual bosonic enhancement factors.
    """
    _check_layout(device, layout)
    dim = layout.total_dim
    h = np.zeros((dim, dim), dtype=complex)
    for c in device.couplings:
        s_a = embed(annihilation_op(layout.dim_of(c.a)), c.a, layout)
        s_b = embed(annihilation_op(layout.dim_of(c.b)), c.b, layout)
        term = RAD_NS_PER_MHZ * c.g * (s_a @ s_b.conj().T)
        h += term + term.conj().T
    return h


def static_hamiltonian(device: DeviceSpec, layout: SubsystemLayout) -> np.ndarray:
    """Undriven lab-frame Hamiltonian: ladder energies plus exchange couplings."""
    _check_layout(device, layout)
    diag = np.zeros(layout.total_dim)
    for spec in device.transmons:
        diag += _level_energies(spec)[layout.site_levels(spec.label)]
    return np.diag(diag).astype(complex) + coupling_matrix(device, layout)


class _FrameProgram:
    """Precomputed rotating-frame phase data for one device + schedule.

    The frame phase of global basis state ``I`` at time ``t`` is

        theta_I(t) = lin_I * t  -  sum_drives beta * cos(w*t + phi) * k_I
                     [+ per-segment constant]

    with ``lin_I`` the summed static ladder energies (rad/ns), ``k_I`` the
    driven site's level in state ``I`` and ``w = RAD_NS_PER_MHZ * nu``. The
    default convention drops the integration constants of the drive term,
    treating ``phi`` as the effective modulation phase of each segment;
    ``include_t0_phase=True`` instead keeps ``theta`` equal to the literal
    time integral of the instantaneous energies (continuous across
    segments), which is the convention needed to map back to the lab frame.
    """

    def __init__(
        self,
        device: DeviceSpec,
        schedule: PulseSchedule | None,
        layout: SubsystemLayout,
        include_t0_phase: bool = False,
    ):
        _check_layout(device, layout)
        self.device = device
        self.schedule = schedule
        self.layout = layout
        self.include_t0_phase = include_t0_phase

        self.lin = np.zeros(layout.total_dim)
        for spec in device.transmons:
            self.lin += _level_energies(spec)[layout.site_levels(spec.label)]

        # per segment: list of (kvec, beta, w, phi, const) for each active tone
        self.seg_drives: list[list[tuple[np.ndarray, float, float, float, float]]] = []
        if schedule is None:
            return
        # Integration constants that keep theta continuous across segment
        # boundaries under the literal-integral convention.
        carry: dict[str, float] = {}
        prev_tone: dict[str, tuple[int, float, float, float]] = {}
        for seg_idx, seg in enumerate(schedule.segments):
            entries = []
            for tone in seg.tones:
                if tone.eps == 0:
                    continue
                kvec = layout.site_levels(tone.target).astype(float)
                beta = tone.beta
                w = RAD_NS_PER_MHZ * tone.nu
                const = 0.0
                if include_t0_phase:
                    c0 = carry.get(tone.target, 0.0)
                    if tone.target in prev_tone:
                        i_p, b_p, w_p, phi_p = prev_tone[tone.target]
                        if i_p != seg_idx - 1:
                            raise ValueError(
                                "literal-integral phases need each site driven in "
                                "contiguous segments"
                            )
                        c0 += b_p * (-math.cos(w_p * seg.t_start + phi_p)) - beta * (
                            -math.cos(w * seg.t_start + tone.phi)
                        )
                    else:
                        c0 += beta * math.cos(tone.phi)
                    const = c0
                    carry[tone.target] = c0
                entries.append((kvec, beta, w, tone.phi, const))
                prev_tone[tone.target] = (seg_idx, beta, w, tone.phi)
            self.seg_drives.append(entries)

    def theta(self, t: float, seg_index: int | None = None) -> np.ndarray:
        """Frame phase vector at time ``t`` (segment resolved by ``t`` if not given)."""
        th = self.lin * t
        if self.schedule is not None:
            if seg_index is None:
                seg_index = self.schedule.segment_at(t)
            for kvec, beta, w, phi, const in self.seg_drives[seg_index]:
                th = th + (-beta * math.cos(w * t + phi) + const) * kvec
        return th

    def diag_rate(self, t: float, seg_index: int | None = None) -> np.ndarray:
        """Instantaneous diagonal energies d(theta)/dt in rad/ns (lab frame)."""
        rate = self.lin.copy()
        if self.schedule is not None:
            if seg_index is None:
                seg_index = self.schedule.segment_at(t)
            for kvec, beta, w, phi, _ in self.seg_drives[seg_index]:
                rate += beta * w * math.sin(w * t + phi) * kvec
        return rate


@dataclass(frozen=True)
class PiecewiseHamiltonian:
    """Time-dependent Hamiltonian split at schedule boundaries.

    ``pieces[i]`` is ``(t_start, t_end, h_fn)``; each ``h_fn`` is valid on
    its closed interval, so integrators can sample stage times at segment
    edges without picking up the neighbouring segment's drive phases.
    Calling the object resolves the segment from ``t`` directly.
    """

    pieces: tuple[tuple[float, float, Callable[[float], np.ndarray]], ...]

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return tuple(p[0] for p in self.pieces) + (self.pieces[-1][1],)

    def __call__(self, t: float) -> np.ndarray:
        starts = [p[0] for p in self.pieces]
        i = min(bisect_right(starts, t) - 1, len(self.pieces) - 1)
        if i < 0 or t < self.pieces[0][0] or t > self.pieces[-1][1] + 1e-9:
            raise ValueError(f"t={t} ns outside the schedule")
        return self.pieces[i][2](t)


def schedule_hamiltonian(
    device: DeviceSpec,
    schedule: PulseSchedule | None,
    layout: SubsystemLayout,
    include_t0_phase: bool = False,
) -> PiecewiseHamiltonian:
    """Rotating-frame Hamiltonian of the driven device, as segment pieces.

    Every piece evaluates ``V * exp(i(theta_i - theta_j))`` with ``V`` the
    static exchange matrix, which is the exact transformed Hamiltonian with
    the full harmonic content of the drives.
    """
    program = _FrameProgram(device, schedule, layout, include_t0_phase)
    v = coupling_matrix(device, layout)

    def make_piece(seg_index: int):
        def h_fn(t: float) -> np.ndarray:
            phase = np.exp(1j * program.theta(t, seg_index))
            return v * np.outer(phase, phase.conj())

        return h_fn

    if schedule is None:
        pieces = ((0.0, math.inf, make_piece(None)),)
    else:
        pieces = tuple(
            (seg.t_start, seg.t_end, make_piece(i)) for i, seg in enumerate(schedule.segments)
        )
    return PiecewiseHamiltonian(pieces)


def interaction_hamiltonian(
    device: DeviceSpec,
    schedule: PulseSchedule | None,
    t: float,
    layout: SubsystemLayout,
    include_t0_phase: bool = False,
) -> np.ndarray:
    """Exact rotating-frame Hamiltonian at time ``t`` ns (rad/ns).

    With no schedule the frame is the undriven one and the couplings rotate
    at the bare detunings only. The diagonal is zero by construction.
    """
    if schedule is not None:
        schedule.segment_at(t)  # range check
    return schedule_hamiltonian(device, schedule, layout, include_t0_phase)(t)


def frame_phases(
    device: DeviceSpec,
    schedule: PulseSchedule | None,
    t: float,
    layout: SubsystemLayout,
    include_t0_phase: bool = False,
) -> np.ndarray:
    """Frame phase ``theta_I(t)`` of every global basis state.

    The lab-frame state is ``exp(-i*theta(t)) * psi_frame(t)`` when the
    literal-integral convention (``include_t0_phase=True``) is used.
    """
    return _FrameProgram(device, schedule, layout, include_t0_phase).theta(t)


def lab_schedule_hamiltonian(
    device: DeviceSpec,
    schedule: PulseSchedule | None,
    layout: SubsystemLayout,
) -> PiecewiseHamiltonian:
    """Lab-frame Hamiltonian of the driven device, as segment pieces."""
    program = _FrameProgram(device, schedule, layout)
    v = coupling_matrix(device, layout)

    def make_piece(seg_index: int):
        def h_fn(t: float) -> np.ndarray:
            return np.diag(program.diag_rate(t, seg_index)).astype(complex) + v

        return h_fn

    if schedule is None:
        pieces = ((0.0, math.inf, make_piece(None)),)
    else:
        pieces = tuple(
            (seg.t_start, seg.t_end, make_piece(i)) for i, seg in enumerate(schedule.segments)
        )
    return PiecewiseHamiltonian(pieces)


def lab_hamiltonian(
    device: DeviceSpec,
    schedule: PulseSchedule | None,
    t: float,
    layout: SubsystemLayout,
) -> np.ndarray:
    """Lab-frame Hamiltonian with the instantaneous modulated frequencies."""
    return lab_schedule_hamiltonian(device, schedule, layout)(t)


def jacobi_anger_hamiltonian(
    device: DeviceSpec,
    schedule: PulseSchedule | None,
    t: float,
    layout: SubsystemLayout,
    n_max: int,
    include_t0_phase: bool = False,
) -> np.ndarray:
    """Rotating-frame Hamiltonian with drive factors truncated harmonically.

    Each drive factor ``exp(-i*b*cos(w*t + phi))`` is replaced by its
    truncated harmonic series ``sum_{|n| <= n_max} (-i)^n J_n(b)
    exp(-i*n*(w*t + phi))``, which converges to the exact factor as
    ``n_max`` grows.
    """
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    program = _FrameProgram(device, schedule, layout, include_t0_phase)
    seg_index = schedule.segment_at(t) if schedule is not None else None
    v = coupling_matrix(device, layout)
    dim = layout.total_dim
    h = np.zeros((dim, dim), dtype=complex)
    drives = program.seg_drives[seg_index] if seg_index is not None else []
    rows, cols = np.nonzero(np.triu(np.abs(v), k=1))
    for i, j in zip(rows, cols):
        phase = np.exp(1j * program.lin[i] * t - 1j * program.lin[j] * t)
        for kvec, beta, w, phi, const in drives:
            dk = kvec[i] - kvec[j]
            if dk == 0:
                continue
            x = w * t + phi
            b = dk * beta
            series = sum(
                (-1j) ** n * _bessel_any(n, b) * np.exp(-1j * n * x)
                for n in range(-n_max, n_max + 1)
            )
            phase *= series * np.exp(1j * dk * const)
        h[i, j] = v[i, j] * phase
        h[j, i] = np.conj(h[i, j])
    return h


# ---------------------------------------------------------------------------
# Bessel weights and drive-depth inversion
# ---------------------------------------------------------------------------


def bessel_j(n: int, x: float) -> float:
    """Bessel function of the first kind ``J_n(x)`` by ascending power series.

    Accurate to well below 1e-10 absolute error for ``|x| <= 8`` and
    ``n <= 20``, which covers every drive depth used here.
    """
    if n < 0:
        raise ValueError("order n must be >= 0")
    return _bessel_any(n, float(x))


def _bessel_any(n: int, x: float) -> float:
    # J_{-n}(x) = (-1)^n J_n(x); J_n(-x) = (-1)^n J_n(x)
    sign = 1.0
    if n < 0:
        n = -n
        sign *= (-1.0) ** n
    if x < 0:
        x = -x
        sign *= (-1.0) ** n
    half = 0.5 * x
    term = 1.0
    for m in range(1, n + 1):
        term *= half / m
    total = term
    q = -half * half
    for m in range(1, 200):
        term *= q / (m * (n + m))
        total += term
        if abs(term) < 1e-18 * (abs(total) + 1e-300):
            break
    return sign * total


def solve_beta_for_ratio(ratio: float, beta_ref: float) -> float:
    """Drive depth ``beta`` with ``J_1(beta) = ratio * J_1(beta_ref)``.

    ``J_1`` is monotone increasing up to its first peak, so the solution is
    found by bisection on ``[0, beta_ref]`` to 1e-10 in the function value.
    """
    if not 0 < ratio <= 1:
        raise ValueError("ratio must lie in (0, 1]")
    if not 0 < beta_ref <= J1_PEAK_X:
        raise ValueError(f"beta_ref must lie in (0, {J1_PEAK_X}]")
    if ratio == 1.0:
        return beta_ref
    target = ratio * bessel_j(1, beta_ref)
    lo, hi = 0.0, beta_ref
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if bessel_j(1, mid) < target:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-14:
            break
    beta = 0.5 * (lo + hi)
    if abs(bessel_j(1, beta) - target) > 1e-10:
        raise ArithmeticError("bisection for the drive depth did not converge")
    return beta


# ---------------------------------------------------------------------------
# resonant effective Hamiltonians
# ---------------------------------------------------------------------------

# Basis of the single-qubit effective Hamiltonian (aux level, then the pair):
#   index = 4*n_aux + (2*n_T1 + n_T2)
# i.e. |0>_a x {|00>, |01>, |10>, |11>}_12 followed by |1>_a x {same}.
SINGLE_QUBIT_BASIS = tuple(
    f"|{a}>_a|{n1}{n2}>_12" for a in (0, 1) for n1 in (0, 1) for n2 in (0, 1)
)

# Basis of the two-qubit effective Hamiltonians: the four logical states of
# the pair code followed by the shelving state |0200> of the driven pair.
TWO_QUBIT_BASIS = ("|00>_L", "|01>_L", "|10>_L", "|11>_L", "|0200>")


def _tone_by_target(drives: Sequence[DriveTone], label: str) -> DriveTone:
    for tone in drives:
        if tone.target == label:
            return tone
    raise ValueError(f"no drive tone targets transmon {label!r}")


def _require_resonance(tone: DriveTone, target_nu: float, what: str) -> None:
    if abs(tone.nu - target_nu) > RESONANCE_TOL_MHZ:
        raise ValueError(
            f"tone on {tone.target!r} is off the {what} resonance: nu={tone.nu} MHz, "
            f"required {target_nu} MHz within {RESONANCE_TOL_MHZ} MHz"
        )


def effective_hamiltonian(
    config: str,
    device: DeviceSpec,
    drives: Sequence[DriveTone],
) -> np.ndarray:
    """Rotating-wave effective Hamiltonian of one gate configuration (rad/ns).

    ``config`` selects the resonance layout:

    * ``"single_qubit"``: tones on T1 and T2 at ``nu_l = omega_l - omega_a``
      produce exchange with the aux transmon at strength
      ``g'_l = J_1(beta_l) g_la`` and phase ``phi_l + pi/2``; returned on
      the 8-dim basis :data:`SINGLE_QUBIT_BASIS`.
    * ``"cnot"``: tones on T3 and T4 at ``nu_l = (omega_2 - omega_l) -
      alpha_2`` couple the logical states to the shelving state ``|0200>``
      with ``g'_2l = sqrt(2) J_1(beta_l) g_2l``; returned on
      :data:`TWO_QUBIT_BASIS`.
    * ``"cphase"``: a single tone on T2 at ``nu = omega_2 - omega_4 -
      alpha_2`` couples ``|11>_L`` to ``|0200>``; same 5-dim basis.
    """
    w = RAD_NS_PER_MHZ
    if config == "single_qubit":
        omega_a = device.transmon("Ta").omega
        arms = {}
        for lbl in ("T1", "T2"):
            tone = _tone_by_target(drives, lbl)
            delta = device.transmon(lbl).omega - omega_a
            if tone.eps > 0:
                _require_resonance(tone, delta, "single-qubit")
            g_eff = bessel_j(1, tone.beta) * device.coupling_g(lbl, "Ta")
            arms[lbl] = g_eff * np.exp(-1j * (tone.phi + np.pi / 2))
        b = np.zeros((4, 4), dtype=complex)
        # T1 excitation exchange with the aux: |10><00| and |11><01| blocks
        b[2, 0] = arms["T1"]
        b[3, 1] = arms["T1"]
        # T2 excitation exchange with the aux
        b[1, 0] = arms["T2"]
        b[3, 2] = arms["T2"]
        h = np.zeros((8, 8), dtype=complex)
        h[:4, 4:] = w * b
        h[4:, :4] = w * b.conj().T
        return h

    if config == "cnot":
        omega_2 = device.transmon("T2").omega
        alpha_2 = device.transmon("T2").alpha
        h = np.zeros((5, 5), dtype=complex)
        for lbl, row in (("T3", 2), ("T4", 3)):
            tone = _tone_by_target(drives, lbl)
            delta = omega_2 - device.transmon(lbl).omega
            _require_resonance(tone, delta - alpha_2, "two-qubit")
            g_eff = math.sqrt(2) * bessel_j(1, tone.beta) * device.coupling_g("T2", lbl)
            # resonant coefficient of |..1..><shelf| for the T_l arm
            coeff = g_eff * np.exp(1j * (tone.phi - np.pi / 2))
            h[row, 4] = w * coeff
            h[4, row] = np.conj(h[row, 4])
        return h

    if config == "cphase":
        tone = _tone_by_target(drives, "T2")
        t2 = device.transmon("T2")
        delta = t2.omega - device.transmon("T4").omega
        _require_resonance(tone, delta - t2.alpha, "controlled-phase")
        g_eff = math.sqrt(2) * bessel_j(1, tone.beta) * device.coupling_g("T2", "T4")
        h = np.zeros((5, 5), dtype=complex)
        h[4, 3] = w * g_eff * np.exp(-1j * (tone.phi + np.pi / 2))
        h[3, 4] = np.conj(h[4, 3])
        return h

    raise ValueError(f"unknown configuration {config!r}; expected single_qubit, cnot or cphase")


# ---------------------------------------------------------------------------
# JSON serialization
# ---------------------------------------------------------------------------


def device_to_dict(device: DeviceSpec) -> dict:
    return {
        "transmons": [
            {
                "label": t.label,
                "omega": t.omega,
                "alpha": t.alpha,
                "levels": t.levels,
                "kappa_minus": t.kappa_minus,
                "kappa_z": t.kappa_z,
            }
            for t in device.transmons
        ],
        "couplings": [{"a": c.a, "b": c.b, "g": c.g} for c in device.couplings],
    }


def device_from_dict(data: dict) -> DeviceSpec:
    transmons = tuple(TransmonSpec(**entry) for entry in data["transmons"])
    couplings = tuple(Coupling(**entry) for entry in data.get("couplings", []))
    return DeviceSpec(transmons, couplings)


def schedule_to_dict(schedule: PulseSchedule) -> dict:
    return {
        "segments": [
            {
                "t_start": seg.t_start,
                "t_end": seg.t_end,
                "tones": [
                    {"target": t.target, "eps": t.eps, "nu": t.nu, "phi": t.phi}
                    for t in seg.tones
                ],
            }
            for seg in schedule.segments
        ]
    }


def schedule_from_dict(data: dict) -> PulseSchedule:
    segments = tuple(
        PulseSegment(
            seg["t_start"],
            seg["t_end"],
            tuple(DriveTone(**tone) for tone in seg.get("tones", [])),
        )
        for seg in data["segments"]
    )
    return PulseSchedule(segments)


def schedule_to_json(schedule: PulseSchedule) -> str:
    return json.dumps(schedule_to_dict(schedule), indent=2)


def schedule_from_json(text: str) -> PulseSchedule:
    return schedule_from_dict(json.loads(text))
