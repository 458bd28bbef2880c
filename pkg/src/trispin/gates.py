"""Pulse schedules, time evolution, and gate synthesis for encoded qubits.

Single-LQ gates are sudden: the logical doublet is exactly invariant under
intra-triple couplings, so a constant coupling excursion causes zero leakage
and the schedule may step discontinuously from idle.  The two-LQ conditional
phase gate ramps the inter-triple coupling adiabatically (ramp, hold, ramp)
and relies on the energy gap to return the system to the logical subspace.

Rotation convention: synthesize_rz(theta) realizes exp(-i theta sigma_z / 2)
on [|0_L>, |1_L>] up to a global phase, and likewise for the other axes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .encoding import _SectorTracker, logical_basis, two_lq_basis
from .hamiltonian import (
    CouplingGraph,
    exchange_term,
    single_lq_graph,
    total_spin,
    two_lq_graph,
)
from .linalg import check_unitary, max_abs

COUPLING_WINDOW = (0.25, 1.75)
AXIS120 = {
    "j12": np.array([np.sqrt(3) / 2, 0.0, 0.5]),
    "j13": np.array([-np.sqrt(3) / 2, 0.0, 0.5]),
}

_SX = np.array([[0, 1], [1, 0]], dtype=np.complex128)
_SY = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
_SZ = np.array([[1, 0], [0, -1]], dtype=np.complex128)


RAMP_PROFILES = {
    "linear": lambda s: s,
    "smooth": lambda s: (1 - np.cos(np.pi * s)) / 2,  # C1 shoulders, no corner kicks
}


@dataclass(frozen=True)
class Segment:
    """One piece of a pulse: hold a configuration or ramp to another.

    Ramp kinds: ``constant`` (hold), ``linear``, or ``smooth`` (raised-cosine
    progress, which removes the slope discontinuities that make the residual
    leakage of linear ramps oscillate with duration).
    """

    duration: float
    start: CouplingGraph
    end: CouplingGraph
    ramp: str = "linear"

    def __post_init__(self):
        if not (np.isfinite(self.duration) and self.duration > 0):
            raise ValueError("segment duration must be positive and finite")
        if self.ramp not in ("constant", "linear", "smooth"):
            raise ValueError(f"unknown ramp kind {self.ramp!r}")
        if self.ramp == "constant" and self.start != self.end:
            raise ValueError("constant segment must have equal endpoint graphs")
        if self.start.n_sites != self.end.n_sites or self.start.field_h != self.end.field_h:
            raise ValueError("segment endpoints must share sites and field")
        pa = [(i, j) for (i, j, _) in self.start.edges]
        pb = [(i, j) for (i, j, _) in self.end.edges]
        if pa != pb:
            raise ValueError("segment endpoints must share the edge set")


def constant_segment(duration: float, graph: CouplingGraph) -> Segment:
    return Segment(duration, graph, graph, "constant")


@dataclass(frozen=True)
class PulseSchedule:
    """Ordered segments of a gate, starting from and returning to idle couplings.

    Ramped segments must join continuously to each other and to the idle
    configuration at the schedule boundaries.  Constant segments may step
    discontinuously (a sudden coupling switch, leakage-free for intra-triple
    couplings).
    """

    segments: tuple[Segment, ...]
    n_sites: int
    idle: CouplingGraph | None = None

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        segs = self.segments
        if not segs:
            return
        idle = self.idle
        if idle is None:
            raise ValueError("non-empty schedule needs its idle configuration")
        if any(j not in (0.0, 1.0) for (_, _, j) in idle.edges):
            raise ValueError("idle couplings must be 1 (intra) or 0 (inter)")
        for seg in segs:
            if seg.start.n_sites != self.n_sites:
                raise ValueError("segment dimension does not match schedule")
        ramped = ("linear", "smooth")
        for a, b in zip(segs[:-1], segs[1:]):
            if a.ramp in ramped and b.ramp in ramped and a.end != b.start:
                raise ValueError("ramped segments must join continuously")
        if segs[0].ramp in ramped and segs[0].start != idle:
            raise ValueError("leading ramp must start from idle")
        if segs[-1].ramp in ramped and segs[-1].end != idle:
            raise ValueError("trailing ramp must end at idle")

    @property
    def total_duration(self) -> float:
        return sum(s.duration for s in self.segments)

    def then(self, other: "PulseSchedule") -> "PulseSchedule":
        """Concatenate two schedules over the same register."""
        if other.n_sites != self.n_sites:
            raise ValueError("schedules act on different registers")
        idle = self.idle if self.idle is not None else other.idle
        return PulseSchedule(self.segments + other.segments, self.n_sites, idle)

    def to_dict(self) -> dict:
        def graph(g: CouplingGraph) -> dict:
            return {"n_sites": g.n_sites, "field_h": g.field_h,
                    "edges": [[i, j, jij] for (i, j, jij) in g.edges]}

        return {
            "n_sites": self.n_sites,
            "total_duration": self.total_duration,
            "segments": [
                {"duration": s.duration, "ramp": s.ramp,
                 "start": graph(s.start), "end": graph(s.end)}
                for s in self.segments
            ],
        }


def empty_schedule(n_sites: int = 3) -> PulseSchedule:
    return PulseSchedule((), n_sites)


class _HamiltonianCache:
    """Per-edge exchange operators so ramp steps only reweight fixed terms."""

    def __init__(self, graph: CouplingGraph):
        self.pairs = [(i, j) for (i, j, _) in graph.edges]
        self.terms = np.stack([exchange_term(graph.n_sites, i, j) for i, j in self.pairs])
        self.zeeman = total_spin(graph.n_sites, "z")
        self.h_field = graph.field_h

    def weights(self, graph: CouplingGraph) -> np.ndarray:
        return np.array([graph.coupling(i, j) for (i, j) in self.pairs])

    def hamiltonian(self, weights: np.ndarray) -> np.ndarray:
        return np.tensordot(weights, self.terms, axes=1) - self.h_field * self.zeeman


def _step(h: np.ndarray, dt: float) -> np.ndarray:
    vals, vecs = np.linalg.eigh(h)
    return (vecs * np.exp(-1j * vals * dt)) @ vecs.conj().T


def propagate(schedule: PulseSchedule, n_steps_per_segment: int = 200) -> np.ndarray:
    """Time-ordered propagator of a schedule on the full Hilbert space.

    Ramps use midpoint stepping (the Hamiltonian at each step's midpoint
    couplings, second-order accurate); constant segments evolve in one exact
    exponential independent of the step count.
    """
    if n_steps_per_segment < 1:
        raise ValueError("n_steps_per_segment must be at least 1")
    dim = 2**schedule.n_sites
    u = np.eye(dim, dtype=np.complex128)
    if not schedule.segments:
        return u
    cache = _HamiltonianCache(schedule.segments[0].start)
    for seg in schedule.segments:
        w0 = cache.weights(seg.start)
        if seg.ramp == "constant":
            u = _step(cache.hamiltonian(w0), seg.duration) @ u
            continue
        profile = RAMP_PROFILES[seg.ramp]
        w1 = cache.weights(seg.end)
        dt = seg.duration / n_steps_per_segment
        for k in range(n_steps_per_segment):
            f = profile((k + 0.5) / n_steps_per_segment)
            u = _step(cache.hamiltonian(w0 + f * (w1 - w0)), dt) @ u
    return check_unitary(u)


def propagation_error_estimate(schedule: PulseSchedule, n_steps_per_segment: int) -> float:
    """Richardson-style step error |U_2n - U_n|_max."""
    return max_abs(propagate(schedule, 2 * n_steps_per_segment)
                   - propagate(schedule, n_steps_per_segment))


# ---------------------------------------------------------------------------
# Logical target gates
# ---------------------------------------------------------------------------

def rotation_gate(theta: float, axis: np.ndarray) -> np.ndarray:
    """exp(-i theta (n . sigma) / 2) for a unit axis n."""
    n = np.asarray(axis, dtype=float)
    gen = n[0] * _SX + n[1] * _SY + n[2] * _SZ
    return np.cos(theta / 2) * np.eye(2) - 1j * np.sin(theta / 2) * gen


def rz_gate(theta: float) -> np.ndarray:
    return rotation_gate(theta, (0, 0, 1))


def rx_gate(theta: float) -> np.ndarray:
    return rotation_gate(theta, (1, 0, 0))


def axis120_gate(theta: float, which: str = "j12") -> np.ndarray:
    return rotation_gate(theta, AXIS120[which])


def cphase_gate(phi: float) -> np.ndarray:
    return np.diag([1.0, 1.0, 1.0, np.exp(1j * phi)]).astype(np.complex128)


# ---------------------------------------------------------------------------
# Single-LQ synthesis
# ---------------------------------------------------------------------------

def _check_window(*couplings: float):
    lo, hi = COUPLING_WINDOW
    for j in couplings:
        if not lo < j < hi:
            raise ValueError(
                f"coupling {j:g} outside the crossing-free window ({lo}, {hi})")


def synthesize_rz(theta: float, delta: float, h: float = 0.75) -> PulseSchedule:
    """Hold J23 = 1 + delta' for |theta/delta| to realize Rz(theta).

    Raising J23 lowers |0_L>, so the excursion sign is set internally to
    -sign(theta) * |delta|; both rotation senses are available because the
    idle coupling is nonzero.
    """
    if delta == 0 or not np.isfinite(delta):
        raise ValueError("delta must be finite and nonzero")
    _check_window(1 + abs(delta), 1 - abs(delta))
    if theta == 0:
        return empty_schedule(3)
    eff = -np.sign(theta) * abs(delta)
    graph = single_lq_graph(j23=1 + eff, h=h)
    return PulseSchedule((constant_segment(abs(theta / delta), graph),), 3,
                         idle=single_lq_graph(h=h))


def synthesize_axis120(theta: float, delta: float, which: str = "j12",
                       h: float = 0.75) -> PulseSchedule:
    """Hold J12 (or J13) = 1 + delta' to rotate about the tilted x-z axis.

    The generator is (delta/4)(sqrt(3) sigma_x + sigma_z) for J12 (the sigma_x
    part flips sign for J13): an axis in the x-z plane 120 degrees away from
    the -z direction.  Hold time |theta/delta|.
    """
    if which not in AXIS120:
        raise ValueError("which must be 'j12' or 'j13'")
    if delta == 0 or not np.isfinite(delta):
        raise ValueError("delta must be finite and nonzero")
    _check_window(1 + abs(delta), 1 - abs(delta))
    if theta == 0:
        return empty_schedule(3)
    eff = np.sign(theta) * abs(delta)
    kwargs = {which: 1 + eff}
    graph = single_lq_graph(**kwargs, h=h)
    return PulseSchedule((constant_segment(abs(theta / delta), graph),), 3,
                         idle=single_lq_graph(h=h))


def synthesize_rx(theta: float, delta: float, h: float = 0.75) -> PulseSchedule:
    """Shift J12 by 2*delta' and J23 by delta' to realize Rx(theta).

    The matched shifts cancel the sigma_z part exactly, leaving the generator
    (sqrt(3) delta / 2) sigma_x; hold time |theta / (sqrt(3) delta)|.
    """
    if delta == 0 or not np.isfinite(delta):
        raise ValueError("delta must be finite and nonzero")
    _check_window(1 + 2 * abs(delta), 1 - 2 * abs(delta), 1 + abs(delta), 1 - abs(delta))
    if theta == 0:
        return empty_schedule(3)
    eff = np.sign(theta) * abs(delta)
    graph = single_lq_graph(j12=1 + 2 * eff, j23=1 + eff, h=h)
    return PulseSchedule((constant_segment(abs(theta) / (np.sqrt(3) * abs(delta)), graph),),
                         3, idle=single_lq_graph(h=h))


def zxz_angles(target: np.ndarray) -> tuple[float, float, float]:
    """Euler angles (alpha, beta, gamma) with target ~ Rz(alpha) Rx(beta) Rz(gamma)."""
    u = check_unitary(np.asarray(target, dtype=np.complex128), tol=1e-10)
    if u.shape != (2, 2):
        raise ValueError("target must be 2x2")
    u = u / np.sqrt(np.linalg.det(u))
    beta = 2 * np.arctan2(abs(u[1, 0]), abs(u[0, 0]))
    if abs(u[1, 0]) < 1e-12:
        return 0.0, 0.0, float(-2 * np.angle(u[0, 0]))
    if abs(u[0, 0]) < 1e-12:
        return float(2 * np.angle(u[1, 0]) + np.pi), float(np.pi), 0.0
    s = -2 * np.angle(u[0, 0])          # alpha + gamma
    d = 2 * np.angle(u[1, 0]) + np.pi   # alpha - gamma
    return float((s + d) / 2), float(beta), float((s - d) / 2)


def _wrap_angle(x: float) -> float:
    return float((x + np.pi) % (2 * np.pi) - np.pi)


def decompose_su2(target: np.ndarray, delta_z: float = 0.5, delta_x: float = 0.25,
                  h: float = 0.75) -> PulseSchedule:
    """z-x-z pulse sequence matching an arbitrary 2x2 unitary up to phase."""
    alpha, beta, gamma = zxz_angles(target)
    schedule = empty_schedule(3)
    for theta, maker, delta in ((gamma, synthesize_rz, delta_z),
                                (beta, synthesize_rx, delta_x),
                                (alpha, synthesize_rz, delta_z)):
        theta = _wrap_angle(theta)
        if abs(theta) > 1e-12:
            schedule = schedule.then(maker(theta, delta, h=h))
    return schedule


# ---------------------------------------------------------------------------
# Two-LQ conditional phase gate
# ---------------------------------------------------------------------------

def _trapezoid_phases(tracker: _SectorTracker, j14_peak: float, eps: float,
                      ramp_time: float, n_nodes: int, track_step: float,
                      ramp_shape: str):
    """Midpoint-quadrature lambda integrals along one ramp of the pulse.

    Returns (per-ramp integrals of the four lambdas, lambdas at the peak).
    """
    profile = RAMP_PROFILES[ramp_shape]
    mids = [profile((k + 0.5) / n_nodes) for k in range(n_nodes)]
    path = [(0.0, 0.0)] + [(j14_peak * f, eps * f) for f in mids] + [(j14_peak, eps)]
    rows = tracker.walk(path, step=track_step)
    dt = ramp_time / n_nodes
    return rows[1:-1].sum(axis=0) * dt, rows[-1]


def _conditional(lams: np.ndarray) -> float:
    return float(lams[0] + lams[3] - lams[1] - lams[2])


def _single_qubit(lams: np.ndarray) -> float:
    return float(lams[0] - (lams[1] + lams[2]) / 2)


def synthesize_cphase(phi: float, j14_peak: float, ramp_time: float,
                      n_calibration_steps: int = 160, h: float = 0.75,
                      mode: str = "simultaneous", max_duration: float = 2000.0,
                      track_step: float = 1e-3,
                      ramp_shape: str = "smooth") -> PulseSchedule:
    """Conditional phase gate from one ramp-hold-ramp J14 pulse.

    The pulse accumulates conditional phase at rate lambda_00 + lambda_11 -
    2 lambda_01 (about 4*J14/9 for small J14); the hold time is chosen so
    the total equals -phi modulo 2 pi.

    In ``simultaneous`` mode the J23 = J56 couplings follow the same pulse
    profile scaled to a shift calibrated by bisection (residual single-qubit
    phase below 1e-10), so the single-LQ z-phases cancel inside the one
    pulse interval.  In ``sequential`` mode the pulse runs uncalibrated and
    a sudden equal z-correction on both triples follows.

    ``ramp_shape`` defaults to ``smooth``: with plain linear ramps the
    residual leakage oscillates with ramp duration (interfering kicks from
    the slope corners), so longer is not always better; the raised-cosine
    shape restores monotone convergence.

    Parameters
    ----------
    phi : conditional phase in radians; 0 gives the empty schedule.
    j14_peak : peak inter-triple coupling, inside the gapped window (0, 0.75).
    ramp_time : duration of each ramp, in 1/J.
    n_calibration_steps : quadrature nodes per ramp for the phase integrals.
    mode : 'simultaneous' or 'sequential' z-phase cancellation.
    max_duration : reject gates longer than this (phase unreachable).
    ramp_shape : 'smooth' or 'linear'.
    """
    if not 0 < j14_peak < 0.75:
        raise ValueError("j14_peak outside the gapped window (0, 0.75)")
    if not (np.isfinite(ramp_time) and ramp_time > 0):
        raise ValueError("ramp_time must be positive")
    if n_calibration_steps < 1:
        raise ValueError("n_calibration_steps must be at least 1")
    if mode not in ("simultaneous", "sequential"):
        raise ValueError("mode must be 'simultaneous' or 'sequential'")
    if ramp_shape not in RAMP_PROFILES:
        raise ValueError("ramp_shape must be 'linear' or 'smooth'")
    idle = two_lq_graph(h=h)
    target_cc = float(np.mod(-phi, 2 * np.pi))
    if target_cc == 0.0:
        return PulseSchedule((), 6, idle=idle)

    tracker = _SectorTracker(h)

    def solve(eps: float) -> tuple[float, float]:
        ramp, peak = _trapezoid_phases(tracker, j14_peak, eps, ramp_time,
                                       n_calibration_steps, track_step, ramp_shape)
        cc_ramp, cc_peak = _conditional(ramp), _conditional(peak)
        total = target_cc
        hold = (total - 2 * cc_ramp) / cc_peak
        while hold < -1e-12:
            total += 2 * np.pi
            hold = (total - 2 * cc_ramp) / cc_peak
        hold = max(hold, 0.0)
        if 2 * ramp_time + hold > max_duration:
            raise ValueError("requested phase unreachable within max_duration")
        sq = 2 * _single_qubit(ramp) + _single_qubit(peak) * hold
        return hold, sq

    if mode == "simultaneous":
        eps_hi = 0.35
        _, sq0 = solve(0.0)
        _, sq1 = solve(eps_hi)
        for m in range(int(np.floor(sq0 / (2 * np.pi))), -1, -1):
            offset = 2 * np.pi * m
            if sq0 - offset >= 0 >= sq1 - offset:
                break
        else:
            raise ValueError("cannot cancel the single-qubit phase inside the shift window")
        lo, hi = 0.0, eps_hi
        eps, residual = 0.0, sq0 - offset
        for _ in range(200):
            if abs(residual) <= 1e-10:
                break
            eps = (lo + hi) / 2
            _, sq = solve(eps)
            residual = sq - offset
            if residual > 0:
                lo = eps
            else:
                hi = eps
        hold, sq = solve(eps)
    else:
        eps = 0.0
        hold, sq = solve(0.0)

    peak_graph = idle.with_couplings({(0, 3): j14_peak, (1, 2): 1 + eps, (4, 5): 1 + eps})
    segments = [Segment(ramp_time, idle, peak_graph, ramp_shape)]
    if hold > 1e-12:
        segments.append(constant_segment(hold, peak_graph))
    segments.append(Segment(ramp_time, peak_graph, idle, ramp_shape))

    if mode == "sequential":
        # z-correction at J14 = 0: an equal shift delta_c changes the
        # single-qubit phase at the exact rate -delta_c per unit time
        delta_c = 0.25
        t_corr = float(np.mod(sq, 2 * np.pi)) / delta_c
        if t_corr > 1e-12:
            corr = idle.with_couplings({(1, 2): 1 + delta_c, (4, 5): 1 + delta_c})
            segments.append(constant_segment(t_corr, corr))
    return PulseSchedule(tuple(segments), 6, idle=idle)


# ---------------------------------------------------------------------------
# Gate scoring
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GateReport:
    """Fidelity, leakage, and phase diagnostics of a propagated gate."""

    logical_unitary: np.ndarray
    fidelity: float
    max_leakage: float
    avg_leakage: float
    conditional_phase: float | None = None


def gate_report(u_full: np.ndarray, target: np.ndarray, basis) -> GateReport:
    """Score a full-space propagator against a logical target.

    fidelity = |tr(target^dag M)|^2 / (d tr(M^dag M)) with M the logical
    block of U (global-phase invariant); leakage_k = 1 - |P U psi_k|^2 over
    the logical basis inputs.
    """
    cols = basis.columns if hasattr(basis, "columns") else np.asarray(basis)
    target = check_unitary(np.asarray(target, dtype=np.complex128), tol=1e-10)
    d = cols.shape[1]
    if target.shape != (d, d):
        raise ValueError(f"target shape {target.shape} does not match basis size {d}")
    m = cols.conj().T @ u_full @ cols
    gram = m.conj().T @ m
    denom = d * float(np.trace(gram).real)
    fidelity = float(abs(np.trace(target.conj().T @ m)) ** 2 / denom) if denom > 1e-30 else 0.0
    leaks = np.clip(1.0 - np.real(np.diag(gram)), 0.0, 1.0)
    phase = None
    if d == 4:
        dg = np.diag(m)
        if np.all(np.abs(dg) > 1e-12):
            phase = float(np.angle(dg[0] * dg[3] / (dg[1] * dg[2])))
    return GateReport(m, min(fidelity, 1.0), float(np.max(leaks)),
                      float(np.mean(leaks)), phase)


def single_lq_report(schedule: PulseSchedule, target: np.ndarray,
                     n_steps_per_segment: int = 200) -> GateReport:
    """Propagate a 3-site schedule and score it on the logical doublet."""
    u = propagate(schedule, n_steps_per_segment)
    return gate_report(u, target, logical_basis((0, 1, 2), 3))


def two_lq_report(schedule: PulseSchedule, target: np.ndarray,
                  n_steps_per_segment: int = 200) -> GateReport:
    """Propagate a 6-site schedule and score it on the logical quartet."""
    u = propagate(schedule, n_steps_per_segment)
    return gate_report(u, target, two_lq_basis())
