"""Sectioned text format for networks plus solver options.

Layout (sections in any order, ``#`` starts a comment, columns are
whitespace-delimited)::

    [OPTIONS]               # optional key/value pairs
    viscosity_ft2_s  1.21e-5
    reynolds_threshold 4000
    tol_gpm 0.001
    max_iter 1000
    init_gpm 600
    flow_floor_cfs 1e-8

    [RESERVOIR]             # exactly one row: id head_ft (id must be 0)
    0  850

    [JUNCTIONS]             # id demand_gpm, ids contiguous 1..N
    1  0

    [PIPES]                 # id from to length_ft diameter_in roughness_c
    1  0 1 3000 14 100

Numbers use '.' as the decimal separator and may use scientific notation.
"""

from dataclasses import replace

from .errors import ParseError
from .hydraulics import FluidProperties
from .network import Junction, Network, Pipe, Reservoir
from .solver import SolverConfig
from . import network as network_mod

_SECTIONS = ("OPTIONS", "RESERVOIR", "JUNCTIONS", "PIPES")
_REQUIRED_SECTIONS = ("RESERVOIR", "JUNCTIONS", "PIPES")

_OPTION_KEYS = (
    "viscosity_ft2_s",
    "reynolds_threshold",
    "tol_gpm",
    "max_iter",
    "init_gpm",
    "flow_floor_cfs",
)


def _parse_float(token: str, what: str, line: int) -> float:
    try:
        return float(token)
    except ValueError:
        raise ParseError(f"{what}: not a number: {token!r}", line) from None


def _parse_int(token: str, what: str, line: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise ParseError(f"{what}: not an integer: {token!r}", line) from None


def parse_network_text(text: str) -> tuple[Network, SolverConfig]:
    """Parse file contents into a validated network and solver settings.

    Raises ``ParseError`` (with a line number where one applies) on
    malformed rows, unknown sections or option keys, duplicate ids, and on
    any network validation failure.
    """
    section = None
    seen: dict[str, int] = {}
    options: dict[str, float] = {}
    reservoir_rows: list[tuple[int, Reservoir]] = []
    junction_rows: list[tuple[int, Junction]] = []
    pipe_rows: list[tuple[int, Pipe]] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ParseError(f"malformed section header: {raw.strip()!r}", lineno)
            name = line[1:-1].strip().upper()
            if name not in _SECTIONS:
                raise ParseError(f"unknown section [{name}]", lineno)
            if name in seen:
                raise ParseError(
                    f"duplicate section [{name}] (first seen on line {seen[name]})", lineno
                )
            seen[name] = lineno
            section = name
            continue
        if section is None:
            raise ParseError(f"content before any section header: {line!r}", lineno)

        tokens = line.split()
        if section == "OPTIONS":
            if len(tokens) != 2:
                raise ParseError("options rows are 'key value'", lineno)
            key = tokens[0].lower()
            if key not in _OPTION_KEYS:
                raise ParseError(f"unknown option key {tokens[0]!r}", lineno)
            if key in options:
                raise ParseError(f"duplicate option key {tokens[0]!r}", lineno)
            options[key] = _parse_float(tokens[1], key, lineno)
        elif section == "RESERVOIR":
            if len(tokens) != 2:
                raise ParseError("reservoir rows are 'id head_ft'", lineno)
            node_id = _parse_int(tokens[0], "reservoir id", lineno)
            if node_id != 0:
                raise ParseError(f"reservoir id must be 0, got {node_id}", lineno)
            if reservoir_rows:
                raise ParseError("more than one reservoir row", lineno)
            head = _parse_float(tokens[1], "reservoir head", lineno)
            reservoir_rows.append((lineno, Reservoir(id=node_id, head_ft=head)))
        elif section == "JUNCTIONS":
            if len(tokens) != 2:
                raise ParseError("junction rows are 'id demand_gpm'", lineno)
            node_id = _parse_int(tokens[0], "junction id", lineno)
            if any(j.id == node_id for _, j in junction_rows):
                raise ParseError(f"duplicate junction id {node_id}", lineno)
            demand = _parse_float(tokens[1], "junction demand", lineno)
            junction_rows.append((lineno, Junction(id=node_id, demand_gpm=demand)))
        else:  # PIPES
            if len(tokens) != 6:
                raise ParseError(
                    "pipe rows are 'id from to length_ft diameter_in roughness_c'", lineno
                )
            pipe_id = _parse_int(tokens[0], "pipe id", lineno)
            if any(p.id == pipe_id for _, p in pipe_rows):
                raise ParseError(f"duplicate pipe id {pipe_id}", lineno)
            pipe_rows.append(
                (
                    lineno,
                    Pipe(
                        id=pipe_id,
                        start=_parse_int(tokens[1], "pipe start node", lineno),
                        end=_parse_int(tokens[2], "pipe end node", lineno),
                        length_ft=_parse_float(tokens[3], "pipe length", lineno),
                        diameter_in=_parse_float(tokens[4], "pipe diameter", lineno),
                        roughness=_parse_float(tokens[5], "pipe roughness", lineno),
                    ),
                )
            )

    for name in _REQUIRED_SECTIONS:
        if name not in seen:
            raise ParseError(f"missing section [{name}]")
    if not reservoir_rows:
        raise ParseError("missing reservoir row", seen["RESERVOIR"])

    junctions = sorted((j for _, j in junction_rows), key=lambda j: j.id)
    junction_ids = [j.id for j in junctions]
    if junction_ids != list(range(1, len(junctions) + 1)):
        raise ParseError(
            f"junction ids must be contiguous 1..{len(junctions)}, got {junction_ids}",
            seen["JUNCTIONS"],
        )
    pipes = sorted((p for _, p in pipe_rows), key=lambda p: p.id)
    pipe_ids = [p.id for p in pipes]
    if pipe_ids != list(range(1, len(pipes) + 1)):
        raise ParseError(
            f"pipe ids must be contiguous 1..{len(pipes)}, got {pipe_ids}", seen["PIPES"]
        )

    network = Network(reservoir=reservoir_rows[0][1], junctions=junctions, pipes=pipes)
    problems = network_mod.validate(network)
    if problems:
        raise ParseError("; ".join(problems))

    config = _config_from_options(options)
    return network, config


def _config_from_options(options: dict[str, float]) -> SolverConfig:
    fluid_kwargs = {}
    if "viscosity_ft2_s" in options:
        fluid_kwargs["kinematic_viscosity_ft2_s"] = options["viscosity_ft2_s"]
    if "reynolds_threshold" in options:
        fluid_kwargs["reynolds_threshold"] = options["reynolds_threshold"]
    try:
        fluid = FluidProperties(**fluid_kwargs)
        config = SolverConfig(fluid=fluid)
        if "tol_gpm" in options:
            config = replace(config, tolerance_gpm=options["tol_gpm"])
        if "max_iter" in options:
            config = replace(config, max_iterations=int(options["max_iter"]))
        if "init_gpm" in options:
            config = replace(config, initial_flow_gpm=options["init_gpm"])
        if "flow_floor_cfs" in options:
            config = replace(config, flow_floor_cfs=options["flow_floor_cfs"])
    except ValueError as exc:
        raise ParseError(f"bad option value: {exc}") from exc
    return config


def parse_network_file(path) -> tuple[Network, SolverConfig]:
    """Read and parse a network file from ``path``."""
    with open(path, encoding="utf-8") as handle:
        text = handle.read()
    return parse_network_text(text)


def serialize_network(network: Network, config: SolverConfig | None = None) -> str:
    """Render a network (and optionally non-default options) back to text.

    The output parses back to an equal ``Network``.
    """
    lines = []
    if config is not None:
        defaults = SolverConfig()
        option_rows = []
        fluid = config.fluid
        if fluid.kinematic_viscosity_ft2_s != defaults.fluid.kinematic_viscosity_ft2_s:
            option_rows.append(f"viscosity_ft2_s {fluid.kinematic_viscosity_ft2_s!r}")
        if fluid.reynolds_threshold != defaults.fluid.reynolds_threshold:
            option_rows.append(f"reynolds_threshold {fluid.reynolds_threshold!r}")
        if config.tolerance_gpm != defaults.tolerance_gpm:
            option_rows.append(f"tol_gpm {config.tolerance_gpm!r}")
        if config.max_iterations != defaults.max_iterations:
            option_rows.append(f"max_iter {config.max_iterations}")
        if isinstance(config.initial_flow_gpm, (int, float)) and (
            config.initial_flow_gpm != defaults.initial_flow_gpm
        ):
            option_rows.append(f"init_gpm {float(config.initial_flow_gpm)!r}")
        if config.flow_floor_cfs != defaults.flow_floor_cfs:
            option_rows.append(f"flow_floor_cfs {config.flow_floor_cfs!r}")
        if option_rows:
            lines.append("[OPTIONS]")
            lines.extend(option_rows)
            lines.append("")

    lines.append("[RESERVOIR]")
    lines.append(f"{network.reservoir.id} {float(network.reservoir.head_ft)!r}")
    lines.append("")
    lines.append("[JUNCTIONS]")
    for j in network.junctions:
        lines.append(f"{j.id} {float(j.demand_gpm)!r}")
    lines.append("")
    lines.append("[PIPES]")
    for p in network.pipes:
        lines.append(
            f"{p.id} {p.start} {p.end} {float(p.length_ft)!r} "
            f"{float(p.diameter_in)!r} {float(p.roughness)!r}"
        )
    lines.append("")
    return "\n".join(lines)
