"""Network model: nodes, pipes, validation, and incidence matrices.

A network consists of one reference reservoir (node 0) with a fixed
hydraulic head, junctions 1..N with non-negative demands, and L pipes.
Pipe orientation is taken from the declared start/end nodes; a flow value
is positive when water moves from ``start`` to ``end``.
"""

from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .units import GPM_PER_CFS


@dataclass(frozen=True)
class Reservoir:
    """The reference node. ``head_ft`` is the total hydraulic head."""

    id: int
    head_ft: float


@dataclass(frozen=True)
class Junction:
    """A demand node. ``demand_gpm`` is consumption, stored non-negative."""

    id: int
    demand_gpm: float


@dataclass(frozen=True)
class Pipe:
    """A pipe link with Hazen-Williams parameters.

    Lengths are in feet, diameters in inches (converted to feet
    internally), roughness is the unitless Hazen-Williams C coefficient.
    """

    id: int
    start: int
    end: int
    length_ft: float
    diameter_in: float
    roughness: float

    @property
    def diameter_ft(self) -> float:
        return self.diameter_in / 12.0


@dataclass(frozen=True)
class Network:
    """Immutable pipe network: one reservoir, N junctions, L pipes."""

    reservoir: Reservoir
    junctions: tuple[Junction, ...]
    pipes: tuple[Pipe, ...]

    def __post_init__(self):
        # accept any iterable; store immutable tuples
        object.__setattr__(self, "junctions", tuple(self.junctions))
        object.__setattr__(self, "pipes", tuple(self.pipes))

    @property
    def num_junctions(self) -> int:
        return len(self.junctions)

    @property
    def num_pipes(self) -> int:
        return len(self.pipes)

    def demands_gpm(self) -> np.ndarray:
        """Junction demands (consumption, >= 0) ordered by junction index."""
        return np.array([j.demand_gpm for j in self.junctions], dtype=float)

    def injections_cfs(self) -> np.ndarray:
        """Injection vector s in cfs: consumption enters with negative sign."""
        return -self.demands_gpm() / GPM_PER_CFS


@dataclass(frozen=True)
class IncidenceDecomposition:
    """Signed node-link incidence matrix of a network, split at the reservoir.

    ``full`` is (N+1) x L with +1 at a link's start node and -1 at its end
    node. ``reservoir_row`` is row 0; ``reduced`` is the remaining N rows
    and has full row rank on connected networks.
    """

    full: np.ndarray
    reservoir_row: np.ndarray
    reduced: np.ndarray


def validate(network: Network) -> list[str]:
    """Check all structural invariants; return one message per violation.

    An empty list means the network is valid. Nothing is raised here so
    that callers can report every problem at once.
    """
    problems: list[str] = []
    res = network.reservoir
    if res.id != 0:
        problems.append(f"reservoir id must be 0, got {res.id}")
    if not np.isfinite(res.head_ft) or res.head_ft <= 0:
        problems.append(f"reservoir head must be finite and positive, got {res.head_ft}")

    n = network.num_junctions
    ids = [j.id for j in network.junctions]
    if ids != list(range(1, n + 1)):
        problems.append(f"junction ids must be contiguous 1..{n}, got {ids}")
    for j in network.junctions:
        if not np.isfinite(j.demand_gpm) or j.demand_gpm < 0:
            problems.append(f"junction {j.id}: demand must be finite and >= 0, got {j.demand_gpm}")

    nodes = set(range(0, n + 1))
    seen_pipe_ids: set[int] = set()
    for p in network.pipes:
        if p.id < 1:
            problems.append(f"pipe {p.id}: id must be a positive integer")
        if p.id in seen_pipe_ids:
            problems.append(f"duplicate pipe id {p.id}")
        seen_pipe_ids.add(p.id)
        if p.start == p.end:
            problems.append(f"self-loop pipe {p.id}")
        for endpoint in (p.start, p.end):
            if endpoint not in nodes:
                problems.append(f"pipe {p.id}: endpoint {endpoint} does not exist")
        if not (np.isfinite(p.length_ft) and p.length_ft > 0):
            problems.append(f"pipe {p.id}: length must be positive, got {p.length_ft}")
        if not (np.isfinite(p.diameter_in) and p.diameter_in > 0):
            problems.append(f"pipe {p.id}: diameter must be positive, got {p.diameter_in}")
        if not (np.isfinite(p.roughness) and p.roughness > 0):
            problems.append(f"pipe {p.id}: roughness must be positive, got {p.roughness}")

    unreachable = _unreachable_from_reservoir(network)
    if unreachable:
        problems.append(
            "disconnected: no path from the reservoir to node(s) "
            + ", ".join(str(u) for u in sorted(unreachable))
        )
    return problems


def _unreachable_from_reservoir(network: Network) -> set[int]:
    """Nodes with no undirected pipe path to node 0 (invalid endpoints ignored)."""
    n = network.num_junctions
    adjacency: dict[int, list[int]] = {node: [] for node in range(n + 1)}
    for p in network.pipes:
        if p.start in adjacency and p.end in adjacency and p.start != p.end:
            adjacency[p.start].append(p.end)
            adjacency[p.end].append(p.start)
    reached = {0}
    queue = deque([0])
    while queue:
        node = queue.popleft()
        for other in adjacency[node]:
            if other not in reached:
                reached.add(other)
                queue.append(other)
    return set(range(n + 1)) - reached


def build_incidence(network: Network) -> IncidenceDecomposition:
    """Build the signed incidence matrix and its reservoir-row split.

    Column l carries +1 at pipes[l].start and -1 at pipes[l].end. Raises
    ``ValidationError`` naming the first violation if the network is
    invalid.
    """
    problems = validate(network)
    if problems:
        raise ValidationError(problems[0])
    n, l = network.num_junctions, network.num_pipes
    full = np.zeros((n + 1, l))
    for col, p in enumerate(network.pipes):
        full[p.start, col] = 1.0
        full[p.end, col] = -1.0
    full.setflags(write=False)
    reservoir_row = full[0, :]
    reduced = full[1:, :]
    return IncidenceDecomposition(full=full, reservoir_row=reservoir_row, reduced=reduced)
