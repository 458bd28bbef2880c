"""Parameter sweeps, gap extraction, level-crossing location, and unit conversion.

The logical energies entering every gap are exact: intra-triple sweeps use
the invariant 2x2 logical block, and inter-LQ sweeps use adiabatic tracking
of the quartet.  "Gap" always means (lowest non-logical level) minus
(highest logical level): the quantity that reaches zero exactly where the
logical levels stop being the ground levels.
"""

from __future__ import annotations

import functools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .encoding import effective_h1, lambda_curve, two_lq_basis
from .gates import (
    PulseSchedule,
    Segment,
    cphase_gate,
    gate_report,
    propagate,
    synthesize_cphase,
)
from .hamiltonian import build_hamiltonian, single_lq_graph, total_spin, two_lq_graph

MU_B_MICROEV_PER_TESLA = 57.88
INTRA_COUPLINGS = ("j12", "j13", "j23")


@dataclass(frozen=True)
class SweepResult:
    """Spectra tabulated over one swept parameter.

    ``spectra`` rows are ascending eigenvalues, ``sz_labels`` the matching
    total-S_z expectations, ``logical`` the exact logical level(s), and
    ``gap`` the distance from the top logical level to the nearest level
    outside the logical set (negative past a crossing).
    """

    parameter_name: str
    grid: np.ndarray
    spectra: np.ndarray
    gap: np.ndarray
    sz_labels: np.ndarray
    logical: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        if g.ndim != 1 or len(g) < 2 or np.any(np.diff(g) <= 0):
            raise ValueError("grid must be strictly increasing with >= 2 points")


@dataclass(frozen=True)
class CrossingReport:
    """Parameter values where the tracked gap reaches zero."""

    crossings: tuple[float, ...]


@dataclass(frozen=True)
class PhysicalUnits:
    """Dimensionful translation of the dimensionless working point."""

    j_microev: float
    g_factor: float
    b_tesla: float
    gap_microev: float


def _remove_matched(values: np.ndarray, targets) -> tuple[np.ndarray, np.ndarray]:
    """Split eigenvalues into (rest, matched) removing one entry per target."""
    pool = list(values)
    matched = []
    for t in targets:
        k = int(np.argmin(np.abs(np.asarray(pool) - t)))
        matched.append(pool.pop(k))
    return np.asarray(pool), np.asarray(matched)


def _gap_above(values: np.ndarray, logical_values) -> float:
    rest, _ = _remove_matched(values, logical_values)
    return float(np.min(rest) - np.max(logical_values))


def _field_point(h: float) -> tuple[np.ndarray, np.ndarray]:
    hmat = build_hamiltonian(single_lq_graph(h=h))
    vals, vecs = np.linalg.eigh(hmat)
    sz = np.real(np.einsum("ij,ik,kj->j", vecs.conj(), total_spin(3, "z"), vecs))
    return vals, sz


def _intra_point(x: float, which: str, h: float) -> tuple[np.ndarray, np.ndarray]:
    hmat = build_hamiltonian(single_lq_graph(**{which: x}, h=h))
    vals, vecs = np.linalg.eigh(hmat)
    sz = np.real(np.einsum("ij,ik,kj->j", vecs.conj(), total_spin(3, "z"), vecs))
    return vals, sz


def _pooled(fn, grid, workers: int):
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, grid))
    return [fn(x) for x in grid]


def idle_logical_energy(h: float) -> float:
    """Energy of the degenerate logical doublet of an idle triple: -3/4 - h/2."""
    return -0.75 - h / 2


def field_gap(h: float) -> float:
    """Distance from the idle logical level to the nearest other level."""
    vals, _ = _field_point(h)
    e_log = idle_logical_energy(h)
    rest, _ = _remove_matched(vals, [e_log, e_log])
    return float(np.min(np.abs(rest - e_log)))


def sweep_field(h_min: float, h_max: float, n_points: int,
                workers: int = 1) -> SweepResult:
    """Idle single-LQ spectrum and protection gap across the Zeeman field."""
    if n_points < 2:
        raise ValueError("n_points must be at least 2")
    grid = np.linspace(h_min, h_max, n_points)
    points = _pooled(_field_point, grid, workers)
    spectra = np.stack([p[0] for p in points])
    sz = np.stack([p[1] for p in points])
    logical = np.array([[idle_logical_energy(h)] for h in grid])
    gap = np.empty(n_points)
    for k, (vals, e) in enumerate(zip(spectra, logical)):
        rest, _ = _remove_matched(vals, [e[0], e[0]])
        gap[k] = np.min(np.abs(rest - e[0]))
    return SweepResult("h", grid, spectra, gap, sz, logical)


def optimal_field(h_lo: float, h_hi: float, tol: float = 1e-6,
                  coarse_points: int = 33) -> float:
    """Field maximizing the idle gap, by ternary search around the grid argmax.

    The coarse grid guards against non-unimodal data: the search is confined
    to the bracket around the best grid point.
    """
    if not h_lo < h_hi:
        raise ValueError("need h_lo < h_hi")
    grid = np.linspace(h_lo, h_hi, coarse_points)
    gaps = np.array([field_gap(h) for h in grid])
    k = int(np.argmax(gaps))
    lo = grid[max(k - 1, 0)]
    hi = grid[min(k + 1, coarse_points - 1)]
    while hi - lo > tol:
        m1 = lo + (hi - lo) / 3
        m2 = hi - (hi - lo) / 3
        if field_gap(m1) < field_gap(m2):
            lo = m1
        else:
            hi = m2
    return float((lo + hi) / 2)


def _logical_pair(which: str, x: float, h: float) -> np.ndarray:
    kwargs = {"j12": 1.0, "j13": 1.0, "j23": 1.0, which: x}
    eff = effective_h1(**kwargs, h=h)
    return np.linalg.eigvalsh(eff.matrix) + eff.trace_offset


def _bisect_zero(fn, lo: float, hi: float, tol: float) -> float:
    flo = fn(lo)
    if flo == 0.0:
        return lo
    while hi - lo > tol:
        mid = (lo + hi) / 2
        fm = fn(mid)
        if fm == 0.0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return (lo + hi) / 2


def _find_crossings(fn, grid: np.ndarray, gaps: np.ndarray,
                    tol: float = 1e-6) -> CrossingReport:
    crossings = []
    for a, b, ga, gb in zip(grid[:-1], grid[1:], gaps[:-1], gaps[1:]):
        if ga == 0.0:
            crossings.append(float(a))
        elif (ga > 0) != (gb > 0):
            crossings.append(float(_bisect_zero(fn, a, b, tol)))
    if len(gaps) and gaps[-1] == 0.0:
        crossings.append(float(grid[-1]))
    return CrossingReport(tuple(crossings))


def sweep_intra(which: str, j_min: float, j_max: float, n_points: int,
                h: float = 0.75, workers: int = 1) -> tuple[SweepResult, CrossingReport]:
    """Spectrum during a single-LQ gate coupling excursion, with crossings."""
    if which not in INTRA_COUPLINGS:
        raise ValueError(f"which must be one of {INTRA_COUPLINGS}")
    if n_points < 2:
        raise ValueError("n_points must be at least 2")
    grid = np.linspace(j_min, j_max, n_points)
    points = _pooled(functools.partial(_intra_point, which=which, h=h), grid, workers)
    spectra = np.stack([p[0] for p in points])
    sz = np.stack([p[1] for p in points])
    logical = np.stack([_logical_pair(which, x, h) for x in grid])
    gap = np.array([_gap_above(vals, pair) for vals, pair in zip(spectra, logical)])

    def gap_at(x: float) -> float:
        vals, _ = _intra_point(x, which, h)
        return _gap_above(vals, _logical_pair(which, x, h))

    result = SweepResult(which, grid, spectra, gap, sz, logical)
    return result, _find_crossings(gap_at, grid, gap)


def _inter_point(x: float, h: float) -> tuple[np.ndarray, np.ndarray]:
    hmat = build_hamiltonian(two_lq_graph(j14=x, h=h))
    vals, vecs = np.linalg.eigh(hmat)
    sz = np.real(np.einsum("ij,ik,kj->j", vecs.conj(), total_spin(6, "z"), vecs))
    return vals, sz


def sweep_inter(j_min: float, j_max: float, n_points: int,
                h: float = 0.75) -> tuple[SweepResult, CrossingReport]:
    """Two-LQ spectrum against the inter-triple coupling, with the gap closing.

    The logical quartet energies come from adiabatic tracking (sequential by
    nature), so this sweep does not fan out to workers.
    """
    if j_min < 0:
        raise ValueError("j_min must be nonnegative")
    if n_points < 2:
        raise ValueError("n_points must be at least 2")
    grid = np.linspace(j_min, j_max, n_points)
    quartet = lambda_curve(grid, h=h)
    points = [_inter_point(x, h) for x in grid]
    spectra = np.stack([p[0] for p in points])
    sz = np.stack([p[1] for p in points])
    gap = np.array([_gap_above(vals, q) for vals, q in zip(spectra, quartet)])

    def gap_at(x: float) -> float:
        vals, _ = _inter_point(x, h)
        return _gap_above(vals, lambda_curve([x], h=h)[0])

    result = SweepResult("j14", grid, spectra, gap, sz, quartet)
    return result, _find_crossings(gap_at, grid, gap)


@dataclass(frozen=True)
class AdiabaticPoint:
    ramp_time: float
    max_leakage: float
    fidelity: float
    conditional_phase: float | None


def adiabatic_leakage_curve(phi: float, j14_peak: float, ramp_times,
                            n_calibration_steps: int = 160,
                            steps_per_unit_time: float = 100.0,
                            h: float = 0.75,
                            ramp_shape: str = "smooth") -> list[AdiabaticPoint]:
    """Leakage and fidelity of the conditional phase gate vs ramp duration.

    A zero peak coupling degenerates to idle evolution: exactly zero leakage
    at every ramp time (and no conditional phase, whatever ``phi`` asked).
    """
    basis = two_lq_basis()
    target = cphase_gate(phi)
    out = []
    for ramp in ramp_times:
        if j14_peak == 0.0:
            idle = two_lq_graph(h=h)
            schedule = PulseSchedule((Segment(ramp, idle, idle, "linear"),
                                      Segment(ramp, idle, idle, "linear")), 6, idle=idle)
        else:
            schedule = synthesize_cphase(phi, j14_peak, ramp,
                                         n_calibration_steps=n_calibration_steps,
                                         h=h, ramp_shape=ramp_shape)
        longest = max((s.duration for s in schedule.segments if s.ramp != "constant"),
                      default=1.0)
        n_steps = max(1, int(np.ceil(longest * steps_per_unit_time)))
        report = gate_report(propagate(schedule, n_steps), target, basis)
        out.append(AdiabaticPoint(float(ramp), report.max_leakage,
                                  report.fidelity, report.conditional_phase))
    return out


def to_physical(j_microev: float, g_factor: float, h: float) -> PhysicalUnits:
    """Translate the dimensionless working point into laboratory units.

    h = g mu_B B / J with mu_B = 57.88 microeV/T, so
    B = h J / (g mu_B); the protection gap scales as gap(h) * J.
    """
    if j_microev <= 0 or g_factor <= 0:
        raise ValueError("exchange scale and g-factor must be positive")
    if h < 0:
        raise ValueError("field must be nonnegative")
    b_tesla = h * j_microev / (g_factor * MU_B_MICROEV_PER_TESLA)
    gap = field_gap(h) * j_microev
    return PhysicalUnits(j_microev, g_factor, float(b_tesla), float(gap))
