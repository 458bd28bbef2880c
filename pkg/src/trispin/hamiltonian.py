"""Spin operators and Heisenberg + Zeeman Hamiltonians on arbitrary coupling graphs.

Units: energies in units of the idle exchange J (hbar = 1), time in 1/J.
Basis convention: site 0 occupies the most significant bit of the product
basis index and bit 0 means spin up, so |up up down> on three sites is index 1.
The Zeeman term is -h * sum_i S_z^i, which makes the S_z = +1/2 sector the
ground sector for h > 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import kron

SX = np.array([[0, 1], [1, 0]], dtype=np.complex128) / 2
SY = np.array([[0, -1j], [1j, 0]], dtype=np.complex128) / 2
SZ = np.array([[1, 0], [0, -1]], dtype=np.complex128) / 2
_AXES = {"x": SX, "y": SY, "z": SZ}

IDLE_FIELD = 0.75


@dataclass(frozen=True)
class CouplingGraph:
    """Exchange-coupled spin-1/2 sites in a global Zeeman field.

    ``edges`` holds (i, j, J_ij) with 0 <= i < j < n_sites and no duplicates.
    """

    n_sites: int
    edges: tuple[tuple[int, int, float], ...]
    field_h: float = 0.0

    def __post_init__(self):
        if self.n_sites < 1:
            raise ValueError("n_sites must be positive")
        if not np.isfinite(self.field_h):
            raise ValueError("field_h must be finite")
        norm = []
        seen = set()
        for (i, j, jij) in self.edges:
            if not (0 <= i < j < self.n_sites):
                raise ValueError(f"edge ({i},{j}) violates 0 <= i < j < n_sites")
            if (i, j) in seen:
                raise ValueError(f"duplicate edge ({i},{j})")
            if not np.isfinite(jij):
                raise ValueError(f"coupling J({i},{j}) must be finite")
            seen.add((i, j))
            norm.append((int(i), int(j), float(jij)))
        object.__setattr__(self, "edges", tuple(norm))
        object.__setattr__(self, "n_sites", int(self.n_sites))
        object.__setattr__(self, "field_h", float(self.field_h))

    @property
    def dim(self) -> int:
        return 2**self.n_sites

    def coupling(self, i: int, j: int) -> float:
        i, j = min(i, j), max(i, j)
        for (a, b, jij) in self.edges:
            if (a, b) == (i, j):
                return jij
        return 0.0

    def with_couplings(self, updates: dict[tuple[int, int], float]) -> "CouplingGraph":
        """Copy with selected edge strengths replaced (edges must exist)."""
        updates = {(min(i, j), max(i, j)): float(v) for (i, j), v in updates.items()}
        existing = {(i, j) for (i, j, _) in self.edges}
        missing = set(updates) - existing
        if missing:
            raise ValueError(f"unknown edges {sorted(missing)}")
        new_edges = tuple(
            (i, j, updates.get((i, j), jij)) for (i, j, jij) in self.edges
        )
        return CouplingGraph(self.n_sites, new_edges, self.field_h)


@dataclass(frozen=True)
class SectorBasis:
    """Product-basis indices with a fixed total magnetization m."""

    m: float
    indices: tuple[int, ...] = field(default_factory=tuple)


def single_lq_graph(j12: float = 1.0, j13: float = 1.0, j23: float = 1.0,
                    h: float = IDLE_FIELD) -> CouplingGraph:
    """One logical qubit on sites (0,1,2); idle mode is all couplings 1."""
    return CouplingGraph(3, ((0, 1, j12), (0, 2, j13), (1, 2, j23)), h)


def two_lq_graph(j14: float = 0.0, j23: float = 1.0, j56: float = 1.0,
                 h: float = IDLE_FIELD) -> CouplingGraph:
    """Two logical qubits on sites (0,1,2) and (3,4,5), coupled through (0,3).

    The (0,3) edge is always present (zero in idle mode) so pulse ramps can
    interpolate it without changing the edge set.
    """
    edges = (
        (0, 1, 1.0), (0, 2, 1.0), (1, 2, j23),
        (3, 4, 1.0), (3, 5, 1.0), (4, 5, j56),
        (0, 3, j14),
    )
    return CouplingGraph(6, edges, h)


def spin_operator(n_sites: int, site: int, axis: str) -> np.ndarray:
    """Single-site spin operator sigma_axis/2 embedded in the 2^n space."""
    if not 0 <= site < n_sites:
        raise ValueError(f"site {site} out of range for {n_sites} sites")
    try:
        op = _AXES[axis]
    except KeyError:
        raise ValueError(f"axis must be one of x, y, z, got {axis!r}") from None
    out = np.eye(1, dtype=np.complex128)
    eye = np.eye(2, dtype=np.complex128)
    for k in range(n_sites):
        out = kron(out, op if k == site else eye)
    return out


def exchange_term(n_sites: int, i: int, j: int) -> np.ndarray:
    """Heisenberg exchange S_i . S_j as a 2^n-dimensional operator."""
    if i == j:
        raise ValueError("exchange requires two distinct sites")
    total = np.zeros((2**n_sites, 2**n_sites), dtype=np.complex128)
    for axis in "xyz":
        total += spin_operator(n_sites, i, axis) @ spin_operator(n_sites, j, axis)
    return total


def total_spin(n_sites: int, axis: str) -> np.ndarray:
    """Sum of single-site spin operators along one axis."""
    total = np.zeros((2**n_sites, 2**n_sites), dtype=np.complex128)
    for site in range(n_sites):
        total += spin_operator(n_sites, site, axis)
    return total


def build_hamiltonian(g: CouplingGraph) -> np.ndarray:
    """H = sum_ij J_ij S_i . S_j  -  h sum_i S_z^i."""
    h = np.zeros((g.dim, g.dim), dtype=np.complex128)
    for (i, j, jij) in g.edges:
        if jij != 0.0:
            h += jij * exchange_term(g.n_sites, i, j)
    if g.field_h != 0.0:
        h -= g.field_h * total_spin(g.n_sites, "z")
    return h


def sz_sectors(n_sites: int) -> list[SectorBasis]:
    """Partition the product basis by total S_z, highest m first."""
    buckets: dict[int, list[int]] = {}
    for idx in range(2**n_sites):
        ups = n_sites - bin(idx).count("1")
        buckets.setdefault(ups, []).append(idx)
    return [
        SectorBasis(m=ups - n_sites / 2, indices=tuple(buckets[ups]))
        for ups in sorted(buckets, reverse=True)
    ]


def sector_restriction(h: np.ndarray, sector: SectorBasis) -> np.ndarray:
    """Block of an S_z-conserving operator on one magnetization sector."""
    idx = np.asarray(sector.indices)
    return h[np.ix_(idx, idx)]


def basis_state(n_sites: int, down_sites: tuple[int, ...]) -> np.ndarray:
    """Product state with the given sites down and all others up."""
    idx = 0
    for s in down_sites:
        if not 0 <= s < n_sites:
            raise ValueError(f"site {s} out of range")
        idx |= 1 << (n_sites - 1 - s)
    v = np.zeros(2**n_sites, dtype=np.complex128)
    v[idx] = 1.0
    return v
