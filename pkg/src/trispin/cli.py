"""Command-line front end: sweeps, gates, verification, and unit conversion.

Every command writes a CSV or JSON artifact and prints a one-line summary to
stdout.  Outputs are byte-reproducible: no wall clock, no randomness, fixed
17-significant-digit float formatting.  Exit codes: 0 ok, 2 configuration
error, 3 precondition violation, 4 numerical failure.

Flags override config-file values.  The config file is line-oriented
``key = value`` text with ``[command]`` section headers; keys before any
section apply to whichever command runs.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from . import encoding, gates, spectra
from .encoding import TrackingError
from .hamiltonian import (
    CouplingGraph,
    build_hamiltonian,
    single_lq_graph,
    sz_sectors,
    total_spin,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PRECONDITION = 3
EXIT_NUMERICAL = 4

_ANGLE_RE = re.compile(r"^([+-]?)(\d+(?:\.\d*)?)?\s*pi\s*(?:/\s*(\d+(?:\.\d*)?))?$")


class ConfigError(Exception):
    """Bad flags, config file, or parameter values (exit code 2)."""


def parse_angle(token: str) -> float:
    """Radians from a decimal literal or a pi token like 'pi', '-pi/4', '2pi'."""
    text = str(token).strip().lower().replace(" ", "")
    m = _ANGLE_RE.match(text)
    if m:
        sign = -1.0 if m.group(1) == "-" else 1.0
        coef = float(m.group(2)) if m.group(2) else 1.0
        den = float(m.group(3)) if m.group(3) else 1.0
        if den == 0:
            raise ConfigError(f"invalid angle {token!r}: zero denominator")
        return sign * coef * np.pi / den
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"invalid angle {token!r}: use radians or pi tokens") from None


def parse_grid(token: str) -> tuple[float, float, int]:
    """'start:stop:npts' grid specification."""
    parts = str(token).split(":")
    if len(parts) != 3:
        raise ConfigError(f"invalid grid {token!r}: expected start:stop:npts")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ConfigError(f"invalid grid {token!r}: non-numeric field") from None
    if n < 1:
        raise ConfigError(f"invalid grid {token!r}: need at least one point")
    return lo, hi, n


def parse_edges(token: str, n_sites: int) -> CouplingGraph:
    """Coupling graph from compact 'i-j:J,i-j:J' edge syntax."""
    edges = []
    for item in str(token).split(","):
        item = item.strip()
        if not item:
            continue
        m = re.match(r"^(\d+)-(\d+):([^:]+)$", item)
        if not m:
            raise ConfigError(f"invalid edge {item!r}: expected i-j:J")
        try:
            edges.append((int(m.group(1)), int(m.group(2)), float(m.group(3))))
        except ValueError:
            raise ConfigError(f"invalid edge {item!r}: bad coupling value") from None
    try:
        return CouplingGraph(n_sites, tuple(edges))
    except ValueError as exc:
        raise ConfigError(f"invalid edges: {exc}") from None


# ---------------------------------------------------------------------------
# Parameter registry
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Param:
    name: str
    kind: str                  # float | int | str | angle | choice
    default: Any = None
    help: str = ""
    choices: tuple[str, ...] = ()
    aliases: tuple[str, ...] = ()

    def parse(self, raw: Any):
        if raw is None:
            return None
        try:
            if self.kind == "float":
                return float(raw)
            if self.kind == "int":
                return int(str(raw), 10)
            if self.kind == "angle":
                return parse_angle(raw)
            if self.kind == "choice":
                val = str(raw)
                if val not in self.choices:
                    raise ConfigError(
                        f"--{self.name}: expected one of {', '.join(self.choices)}, got {val!r}")
                return val
            return str(raw)
        except ConfigError:
            raise
        except (TypeError, ValueError):
            raise ConfigError(f"--{self.name}: expected {self.kind}, got {raw!r}") from None


COMMON = (
    Param("out", "str", None, "output file path (default <command>.<format>)"),
    Param("format", "choice", None, "artifact format", ("csv", "json")),
    Param("config", "str", None, "optional config file"),
)

COMMANDS: dict[str, dict] = {
    "spectrum": {
        "help": "eigenvalues of one coupling graph (default: idle triangle)",
        "format": "json",
        "params": (
            Param("j12", "float", 1.0), Param("j13", "float", 1.0),
            Param("j23", "float", 1.0), Param("h", "float", 0.75),
            Param("n-sites", "int", 3, "register size when --edges is given"),
            Param("edges", "str", None, "general graph as i-j:J,i-j:J"),
        ),
    },
    "sweep-field": {
        "help": "idle spectrum and gap vs Zeeman field",
        "format": "csv",
        "params": (
            Param("min", "float", 0.0), Param("max", "float", 1.5),
            Param("points", "int", 301),
            Param("workers", "int", 1, "worker pool size for grid points"),
        ),
    },
    "sweep-intra": {
        "help": "spectrum vs one intra-triple coupling, with level crossings",
        "format": "csv",
        "params": (
            Param("which", "choice", "j23", "coupling to vary", ("j12", "j13", "j23")),
            Param("min", "float", 0.1), Param("max", "float", 1.9),
            Param("points", "int", 301), Param("h", "float", 0.75),
            Param("workers", "int", 1),
        ),
    },
    "sweep-inter": {
        "help": "two-LQ spectrum vs the inter-triple coupling",
        "format": "csv",
        "params": (
            Param("min", "float", 0.0), Param("max", "float", 0.85),
            Param("points", "int", 301), Param("h", "float", 0.75),
        ),
    },
    "lambdas": {
        "help": "tracked logical quartet eigenvalues vs the inter-triple coupling",
        "format": "csv",
        "params": (
            Param("min", "float", 0.0), Param("max", "float", 0.7),
            Param("points", "int", 71), Param("h", "float", 0.75),
        ),
    },
    "verify-eq7": {
        "help": "residuals of the reference eigenvalue polynomials",
        "format": "json",
        "params": (
            Param("grid", "str", "0:0.7:71", "j14 grid as start:stop:npts"),
            Param("h", "float", 0.75),
        ),
    },
    "gate": {
        "help": "synthesize a gate schedule, propagate it, and score it",
        "format": "json",
        "params": (
            Param("type", "choice", "rz", "gate kind",
                  ("rz", "rx", "axis120", "su2", "cphase")),
            Param("theta", "angle", "pi/2", "rotation angle"),
            Param("delta", "float", 0.25, "coupling excursion magnitude"),
            Param("which", "choice", "j12", "axis120 coupling", ("j12", "j13")),
            Param("euler", "str", None, "su2 target as z,x,z angle tokens"),
            Param("phi", "angle", "pi", "conditional phase"),
            Param("j14", "float", 0.5, "peak inter-triple coupling"),
            Param("ramp-time", "float", 20.0),
            Param("cal-steps", "int", 160, "calibration quadrature nodes per ramp"),
            Param("mode", "choice", "simultaneous", "z cancellation mode",
                  ("simultaneous", "sequential")),
            Param("ramp-shape", "choice", "smooth", "pulse ramp profile",
                  ("smooth", "linear")),
            Param("steps-per-unit", "float", 100.0, "propagation steps per 1/J"),
            Param("h", "float", 0.75),
        ),
    },
    "adiabatic": {
        "help": "conditional-phase leakage and fidelity vs ramp duration",
        "format": "csv",
        "params": (
            Param("phi", "angle", "pi"), Param("j14", "float", 0.5),
            Param("ramp-times", "str", "5,10,20,40"),
            Param("cal-steps", "int", 160),
            Param("ramp-shape", "choice", "smooth", "pulse ramp profile",
                  ("smooth", "linear")),
            Param("steps-per-unit", "float", 100.0),
            Param("h", "float", 0.75),
        ),
    },
    "units": {
        "help": "magnetic field and gap in laboratory units",
        "format": "json",
        "params": (
            Param("j", "float", 7.0, "exchange scale in microeV", aliases=("J",)),
            Param("g", "float", 0.44, "g-factor magnitude"),
            Param("h", "float", 0.75),
        ),
    },
}


@dataclass
class RunConfig:
    command: str
    params: dict[str, Any]
    output_path: str
    fmt: str


# ---------------------------------------------------------------------------
# Config file and flag merging
# ---------------------------------------------------------------------------

def read_config_file(path: str) -> dict[str, dict[str, str]]:
    """Sections of key = value pairs; keys outside sections land in ''."""
    sections: dict[str, dict[str, str]] = {"": {}}
    current = ""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if current not in COMMANDS:
                raise ConfigError(f"{path}:{lineno}: unknown section [{current}]")
            sections.setdefault(current, {})
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        sections[current][key.strip().replace("-", "_").lower()] = value.strip()
    return sections


def _registry(command: str) -> dict[str, Param]:
    table = {}
    for p in COMMANDS[command]["params"] + COMMON:
        table[p.name.replace("-", "_")] = p
    return table


def parse_config(argv: list[str]) -> RunConfig:
    """Flags plus optional config file, flags winning; unknown keys rejected."""
    parser = argparse.ArgumentParser(
        prog="trispin",
        description="Exact-diagonalization toolkit for triangle-encoded "
                    "exchange-only spin qubits.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, meta in COMMANDS.items():
        p = sub.add_parser(name, help=meta["help"])
        for param in meta["params"] + COMMON:
            flags = [f"--{param.name}"] + [f"--{a}" for a in param.aliases]
            p.add_argument(*flags, dest=param.name.replace("-", "_"),
                           default=None, help=param.help, metavar=param.kind.upper())
    ns = parser.parse_args(argv)
    command = ns.command
    registry = _registry(command)

    merged: dict[str, Any] = {key: p.parse(p.default) for key, p in registry.items()}
    config_path = getattr(ns, "config", None)
    if config_path:
        sections = read_config_file(config_path)
        for scope in ("", command):
            for key, value in sections.get(scope, {}).items():
                if key not in registry:
                    raise ConfigError(f"unknown config key {key!r} for command {command}")
                merged[key] = registry[key].parse(value)
    for key, param in registry.items():
        raw = getattr(ns, key, None)
        if raw is not None:
            merged[key] = param.parse(raw)

    fmt = merged.pop("format") or COMMANDS[command]["format"]
    out = merged.pop("out") or f"{command}.{fmt}"
    merged.pop("config", None)
    return RunConfig(command, merged, out, fmt)


# ---------------------------------------------------------------------------
# Artifact writers
# ---------------------------------------------------------------------------

def fmt_float(x: float) -> str:
    return format(float(x), ".17g")


def write_csv(path: str, header: list[str], rows: list[list]) -> None:
    def cell(v) -> str:
        if isinstance(v, (float, np.floating)):
            return fmt_float(v)
        return str(v)

    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(cell(v) for v in row) + "\n")
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc}") from None


def jsonable(obj):
    if isinstance(obj, dict):
        return {k: jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def write_json(path: str, payload: dict) -> None:
    body = {"schema": 1}
    body.update(jsonable(payload))
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(body, fh, indent=2)
            fh.write("\n")
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc}") from None


def _sweep_artifact(cfg: RunConfig, result: spectra.SweepResult,
                    extra: dict | None = None) -> None:
    if cfg.fmt == "csv":
        dim = result.spectra.shape[1]
        header = [result.parameter_name] + [f"e{k + 1}" for k in range(dim)] + ["gap"]
        rows = [[x, *vals, g] for x, vals, g in
                zip(result.grid, result.spectra, result.gap)]
        write_csv(cfg.output_path, header, rows)
        return
    payload = {
        "parameter": result.parameter_name,
        "grid": result.grid,
        "spectra": result.spectra,
        "gap": result.gap,
        "sz_labels": result.sz_labels,
        "logical": result.logical,
    }
    payload.update(extra or {})
    write_json(cfg.output_path, payload)


# ---------------------------------------------------------------------------
# Command implementations
# ---------------------------------------------------------------------------

def _run_spectrum(cfg: RunConfig) -> str:
    p = cfg.params
    if p["edges"] is not None:
        parsed = parse_edges(p["edges"], p["n_sites"])
        graph = CouplingGraph(parsed.n_sites, parsed.edges, p["h"])
    else:
        graph = single_lq_graph(p["j12"], p["j13"], p["j23"], p["h"])
    hmat = build_hamiltonian(graph)
    vals, vecs = np.linalg.eigh(hmat)
    sz_op = total_spin(graph.n_sites, "z")
    sz = np.real(np.einsum("ij,ik,kj->j", vecs.conj(), sz_op, vecs))
    degeneracy = int(np.sum(np.abs(vals - vals[0]) <= 1e-9))
    gap = float(vals[degeneracy] - vals[0]) if degeneracy < len(vals) else 0.0
    if cfg.fmt == "csv":
        write_csv(cfg.output_path, ["level", "energy", "sz"],
                  [[k, v, s] for k, (v, s) in enumerate(zip(vals, sz))])
    else:
        write_json(cfg.output_path, {
            "edges": [[i, j, jij] for (i, j, jij) in graph.edges],
            "field_h": graph.field_h,
            "energies": vals, "sz": sz,
            "ground_degeneracy": degeneracy, "gap": gap,
            "sector_sizes": {str(s.m): len(s.indices)
                             for s in sz_sectors(graph.n_sites)},
        })
    return (f"ground energy {fmt_float(vals[0])} (degeneracy {degeneracy}), "
            f"gap {fmt_float(gap)}")


def _run_sweep_field(cfg: RunConfig) -> str:
    p = cfg.params
    result = spectra.sweep_field(p["min"], p["max"], p["points"], workers=p["workers"])
    h_star = spectra.optimal_field(p["min"], p["max"])
    _sweep_artifact(cfg, result, {"h_star": h_star})
    return f"gap maximized at h* = {fmt_float(h_star)}"


def _run_sweep_intra(cfg: RunConfig) -> str:
    p = cfg.params
    result, crossings = spectra.sweep_intra(p["which"], p["min"], p["max"],
                                            p["points"], h=p["h"], workers=p["workers"])
    _sweep_artifact(cfg, result, {"crossings": list(crossings.crossings)})
    pts = ", ".join(fmt_float(c) for c in crossings.crossings) or "none"
    return f"level crossings of {p['which']} at: {pts}"


def _run_sweep_inter(cfg: RunConfig) -> str:
    p = cfg.params
    result, crossings = spectra.sweep_inter(p["min"], p["max"], p["points"], h=p["h"])
    _sweep_artifact(cfg, result, {"crossings": list(crossings.crossings)})
    pts = ", ".join(fmt_float(c) for c in crossings.crossings) or "none in range"
    return f"logical gap closes at j14 = {pts}"


def _run_lambdas(cfg: RunConfig) -> str:
    p = cfg.params
    grid = np.linspace(p["min"], p["max"], p["points"])
    rows = encoding.lambda_curve(grid, h=p["h"])
    table = [[x, r[0], (r[1] + r[2]) / 2, r[3], r[0] + r[3] - r[1] - r[2]]
             for x, r in zip(grid, rows)]
    if cfg.fmt == "csv":
        write_csv(cfg.output_path,
                  ["j14", "lambda00", "lambda01", "lambda11", "entangling"], table)
    else:
        write_json(cfg.output_path, {
            "grid": grid,
            "lambda00": [r[1] for r in table],
            "lambda01": [r[2] for r in table],
            "lambda11": [r[3] for r in table],
            "entangling": [r[4] for r in table],
        })
    last = table[-1]
    return (f"at j14 = {fmt_float(last[0])}: lambda00 = {fmt_float(last[1])}, "
            f"lambda01 = {fmt_float(last[2])}, lambda11 = {fmt_float(last[3])}")


def _run_verify(cfg: RunConfig) -> str:
    p = cfg.params
    lo, hi, n = parse_grid(p["grid"])
    if lo < 0 or hi < lo:
        raise ValueError("grid must be nonnegative and ascending")
    report = encoding.verify_lambda_polynomials(np.linspace(lo, hi, n), h=p["h"])
    summary = {
        "max_cubic_residual_on_11": max(r["cubic_residual_on_11"] for r in report),
        "min_cubic_residual_on_01": min(r["cubic_residual_on_01"] for r in report),
        "max_corrected_line_residual": max(r["line_corrected_residual"] for r in report),
        "min_line_residual": min(r["line_residual"] for r in report),
        "quadratic_real_anywhere": any(r["quadratic_has_real_roots"] for r in report),
    }
    write_json(cfg.output_path, {"points": report, **summary})
    return (f"cubic residual on the 1/36-slope branch <= "
            f"{fmt_float(summary['max_cubic_residual_on_11'])}; reference linear "
            f"relation off by >= {fmt_float(summary['min_line_residual'])}")


def _parse_ramp_times(token: str) -> list[float]:
    try:
        times = [float(t) for t in str(token).split(",") if t.strip()]
    except ValueError:
        raise ConfigError(f"--ramp-times: bad list {token!r}") from None
    if not times or any(t <= 0 for t in times):
        raise ConfigError("--ramp-times: need positive durations")
    return times


def _run_gate(cfg: RunConfig) -> str:
    p = cfg.params
    kind = p["type"]
    if kind == "cphase":
        schedule = gates.synthesize_cphase(
            p["phi"], p["j14"], p["ramp_time"],
            n_calibration_steps=p["cal_steps"], h=p["h"], mode=p["mode"],
            ramp_shape=p["ramp_shape"])
        target = gates.cphase_gate(p["phi"])
        basis = encoding.two_lq_basis()
    else:
        if kind == "rz":
            schedule = gates.synthesize_rz(p["theta"], p["delta"], h=p["h"])
            target = gates.rz_gate(p["theta"])
        elif kind == "rx":
            schedule = gates.synthesize_rx(p["theta"], p["delta"], h=p["h"])
            target = gates.rx_gate(p["theta"])
        elif kind == "axis120":
            schedule = gates.synthesize_axis120(p["theta"], p["delta"],
                                                which=p["which"], h=p["h"])
            target = gates.axis120_gate(p["theta"], p["which"])
        else:
            if not p["euler"]:
                raise ConfigError("--euler is required for su2 gates")
            toks = [t for t in p["euler"].split(",") if t.strip()]
            if len(toks) != 3:
                raise ConfigError("--euler: expected three angle tokens z,x,z")
            a, b, c = (parse_angle(t) for t in toks)
            target = gates.rz_gate(a) @ gates.rx_gate(b) @ gates.rz_gate(c)
            schedule = gates.decompose_su2(target, h=p["h"])
        basis = encoding.logical_basis((0, 1, 2), 3)
    longest = max((s.duration for s in schedule.segments), default=1.0)
    n_steps = max(1, int(np.ceil(longest * p["steps_per_unit"])))
    u = gates.propagate(schedule, n_steps)
    report = gates.gate_report(u, target, basis)
    write_json(cfg.output_path, {
        "type": kind,
        "fidelity": report.fidelity,
        "max_leakage": report.max_leakage,
        "avg_leakage": report.avg_leakage,
        "conditional_phase": report.conditional_phase,
        "logical_unitary_re": np.real(report.logical_unitary),
        "logical_unitary_im": np.imag(report.logical_unitary),
        "schedule": schedule.to_dict(),
    })
    return (f"{kind}: fidelity {fmt_float(report.fidelity)}, "
            f"max leakage {fmt_float(report.max_leakage)}")


def _run_adiabatic(cfg: RunConfig) -> str:
    p = cfg.params
    times = _parse_ramp_times(p["ramp_times"])
    rows = spectra.adiabatic_leakage_curve(
        p["phi"], p["j14"], times, n_calibration_steps=p["cal_steps"],
        steps_per_unit_time=p["steps_per_unit"], h=p["h"],
        ramp_shape=p["ramp_shape"])
    table = [[r.ramp_time, r.max_leakage, r.fidelity] for r in rows]
    if cfg.fmt == "csv":
        write_csv(cfg.output_path, ["ramp_time", "max_leakage", "fidelity"], table)
    else:
        write_json(cfg.output_path, {"rows": [
            {"ramp_time": r.ramp_time, "max_leakage": r.max_leakage,
             "fidelity": r.fidelity, "conditional_phase": r.conditional_phase}
            for r in rows]})
    last = rows[-1]
    return (f"ramp {fmt_float(last.ramp_time)}: leakage "
            f"{fmt_float(last.max_leakage)}, fidelity {fmt_float(last.fidelity)}")


def _run_units(cfg: RunConfig) -> str:
    p = cfg.params
    units = spectra.to_physical(p["j"], p["g"], p["h"])
    write_json(cfg.output_path, {
        "j_microev": units.j_microev, "g_factor": units.g_factor,
        "h": p["h"], "b_tesla": units.b_tesla, "gap_microev": units.gap_microev,
    })
    return (f"B = {fmt_float(units.b_tesla)} T, "
            f"gap = {fmt_float(units.gap_microev)} microeV")


_RUNNERS: dict[str, Callable[[RunConfig], str]] = {
    "spectrum": _run_spectrum,
    "sweep-field": _run_sweep_field,
    "sweep-intra": _run_sweep_intra,
    "sweep-inter": _run_sweep_inter,
    "lambdas": _run_lambdas,
    "verify-eq7": _run_verify,
    "gate": _run_gate,
    "adiabatic": _run_adiabatic,
    "units": _run_units,
}


def run(cfg: RunConfig) -> int:
    summary = _RUNNERS[cfg.command](cfg)
    print(summary)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_config(argv)
        return run(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"precondition violated: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (TrackingError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
