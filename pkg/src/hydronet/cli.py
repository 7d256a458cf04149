"""Command-line interface: solve networks and report contraction diagnostics.

Two subcommands::

    hydronet solve NETWORK [--tol-gpm X] [--max-iter N] [--init-gpm V|@FILE]
                           [--method fp|newton] [--trace PATH] [--out PATH]
                           [--analyze]
    hydronet analyze NETWORK [same solver flags] [--solution PATH] [--out PATH]

The solution document is JSON (written to --out, stdout by default); a
human-readable table goes to stderr. Exit codes: 0 ok, 1 input error,
2 non-convergence, 3 contraction test failed (spectral radius >= 1).
"""

import argparse
import json
import sys
from dataclasses import replace

import numpy as np

from .contraction import ContractionReport, contraction_report
from .errors import HydronetError
from .netfile import parse_network_file
from .newton import newton_solve
from .solver import HydraulicSystem, IterationRecord, SolveResult, SolverConfig
from .units import gpm_to_cfs

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_NOT_CONVERGED = 2
EXIT_NOT_CONTRACTION = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hydronet",
        description="Steady-state solver for pipe-only water distribution networks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("network", help="network file path")
        p.add_argument("--tol-gpm", type=float, default=None,
                       help="stopping tolerance on the map gap, GPM")
        p.add_argument("--max-iter", type=int, default=None,
                       help="iteration limit")
        p.add_argument("--init-gpm", default=None,
                       help="initial flow, GPM: a number or @FILE with one value per pipe")
        p.add_argument("--method", choices=("fp", "newton"), default="fp",
                       help="solver: fixed-point iteration or Newton-Raphson")
        p.add_argument("--out", default=None,
                       help="write the JSON solution document here (default: stdout)")

    p_solve = sub.add_parser("solve", help="solve flows and heads")
    add_common(p_solve)
    p_solve.add_argument("--trace", default=None,
                         help="write the per-iteration CSV trace here")
    p_solve.add_argument("--analyze", action="store_true",
                         help="append the contraction block to the solution document")

    p_analyze = sub.add_parser("analyze", help="contraction diagnostics at the solution")
    add_common(p_analyze)
    p_analyze.add_argument("--solution", default=None,
                           help="reuse flows from a prior solution document "
                                "instead of solving")
    return parser


def _parse_init_gpm(spec: str, num_pipes: int):
    if spec.startswith("@"):
        with open(spec[1:], encoding="utf-8") as handle:
            values = [float(tok) for tok in handle.read().split()]
        if len(values) != num_pipes:
            raise ValueError(
                f"initial-flow file has {len(values)} values, network has {num_pipes} pipes"
            )
        return tuple(values)
    return float(spec)


def _apply_overrides(config: SolverConfig, args, num_pipes: int) -> SolverConfig:
    if args.tol_gpm is not None:
        config = replace(config, tolerance_gpm=args.tol_gpm)
    if args.max_iter is not None:
        config = replace(config, max_iterations=args.max_iter)
    if args.init_gpm is not None:
        config = replace(config, initial_flow_gpm=_parse_init_gpm(args.init_gpm, num_pipes))
    return config


def _solve_with_method(system: HydraulicSystem, config: SolverConfig, method: str):
    """Run the chosen solver; returns (SolveResult-like fields, trace records)."""
    if method == "fp":
        return system.solve(config)
    newton = newton_solve(system)
    heads = newton.heads_ft
    q_cfs = newton.state.flows_cfs
    cont_gpm, energy_ft = system.residuals(q_cfs, heads)
    warnings = system.turbulence_warnings(q_cfs, config.fluid)
    return SolveResult(
        flows_gpm=newton.flows_gpm,
        heads_ft=heads,
        reservoir_intake_gpm=system.reservoir_intake_gpm(q_cfs),
        iterations=newton.iterations,
        converged=newton.converged,
        trace=newton.trace,
        continuity_residual_gpm=cont_gpm,
        energy_residual_ft=energy_ft,
        final_map_gap_gpm=float("nan"),
        floor_activations=0,
        warnings=warnings,
    )


def solution_document(
    system: HydraulicSystem, result: SolveResult, report: ContractionReport | None
) -> dict:
    """JSON-compatible solution tree; numbers keep full precision."""
    pipes = system.network.pipes
    junctions = system.network.junctions
    contraction = None
    if report is not None:
        contraction = {
            "spectral_radius": report.spectral_radius,
            "rate_estimate": report.rate_estimate,
            "is_local_contraction": report.is_local_contraction,
            "empirical_ratio": report.empirical_ratio,
            "eigenvalue_magnitudes": [float(v) for v in report.eigenvalue_magnitudes],
        }
    return {
        "flows_gpm": {str(p.id): float(result.flows_gpm[col]) for col, p in enumerate(pipes)},
        "heads_ft": {str(j.id): float(result.heads_ft[col]) for col, j in enumerate(junctions)},
        "reservoir_intake_gpm": float(result.reservoir_intake_gpm),
        "iterations": result.iterations,
        "converged": result.converged,
        "residuals": {
            "continuity_gpm": float(result.continuity_residual_gpm),
            "energy_ft": float(result.energy_residual_ft),
        },
        "contraction": contraction,
        "warnings": list(result.warnings),
    }


def write_trace_csv(path: str, trace: list[IterationRecord]) -> None:
    """CSV with header iter,step_inf_gpm,ratio; ratio blank on the first row."""
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("iter,step_inf_gpm,ratio\n")
        for record in trace:
            ratio = "" if record.ratio is None else repr(record.ratio)
            handle.write(f"{record.iteration},{record.step_inf_gpm!r},{ratio}\n")


def _emit_document(document: dict, out_path: str | None) -> None:
    payload = json.dumps(document, indent=2) + "\n"
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(payload)
    else:
        sys.stdout.write(payload)


def _print_summary(system: HydraulicSystem, result: SolveResult) -> None:
    """Two-decimal table on stderr, mirroring how solutions are usually quoted."""
    status = "converged" if result.converged else "NOT converged"
    print(
        f"{status} in {result.iterations} iteration(s); "
        f"residuals: continuity {result.continuity_residual_gpm:.3g} GPM, "
        f"energy {result.energy_residual_ft:.3g} ft",
        file=sys.stderr,
    )
    print("pipe   flow (GPM)", file=sys.stderr)
    for col, pipe in enumerate(system.network.pipes):
        print(f"{pipe.id:>4}   {result.flows_gpm[col]:>10.2f}", file=sys.stderr)
    print("node   head (ft)", file=sys.stderr)
    for col, junction in enumerate(system.network.junctions):
        print(f"{junction.id:>4}   {result.heads_ft[col]:>10.2f}", file=sys.stderr)
    print(f"reservoir intake: {result.reservoir_intake_gpm:.2f} GPM", file=sys.stderr)
    for warning in result.warnings:
        print(f"warning: {warning}", file=sys.stderr)


def _cmd_solve(args) -> int:
    network, config = parse_network_file(args.network)
    system = HydraulicSystem(network)
    config = _apply_overrides(config, args, system.num_pipes)
    result = _solve_with_method(system, config, args.method)

    report = None
    if args.analyze and result.converged:
        report = contraction_report(
            system, gpm_to_cfs(result.flows_gpm), result.trace, config.flow_floor_cfs
        )
    elif args.analyze and not result.converged:
        result.warnings.append("contraction block skipped: solve did not converge")

    if args.trace:
        write_trace_csv(args.trace, result.trace)
    _emit_document(solution_document(system, result, report), args.out)
    _print_summary(system, result)
    return EXIT_OK if result.converged else EXIT_NOT_CONVERGED


def _load_solution_flows(path: str, system: HydraulicSystem) -> np.ndarray:
    with open(path, encoding="utf-8") as handle:
        document = json.load(handle)
    if not document.get("converged", False):
        raise HydronetError(f"solution document {path!r} is not a converged solution")
    flows = document["flows_gpm"]
    try:
        ordered = [flows[str(p.id)] for p in system.network.pipes]
    except KeyError as exc:
        raise HydronetError(f"solution document missing flow for pipe {exc}") from None
    return np.asarray(ordered, dtype=float)


def _cmd_analyze(args) -> int:
    network, config = parse_network_file(args.network)
    system = HydraulicSystem(network)
    config = _apply_overrides(config, args, system.num_pipes)

    if args.solution:
        flows_gpm = _load_solution_flows(args.solution, system)
        heads = system.recover_heads(gpm_to_cfs(flows_gpm), config.flow_floor_cfs)
        cont_gpm, energy_ft = system.residuals(gpm_to_cfs(flows_gpm), heads)
        result = SolveResult(
            flows_gpm=flows_gpm,
            heads_ft=heads,
            reservoir_intake_gpm=system.reservoir_intake_gpm(gpm_to_cfs(flows_gpm)),
            iterations=0,
            converged=True,
            trace=[],
            continuity_residual_gpm=cont_gpm,
            energy_residual_ft=energy_ft,
            final_map_gap_gpm=float("nan"),
            floor_activations=0,
            warnings=system.turbulence_warnings(gpm_to_cfs(flows_gpm), config.fluid),
        )
    else:
        result = _solve_with_method(system, config, args.method)
        if not result.converged:
            print(
                f"solve did not converge within {result.iterations} iterations; "
                "no contraction report",
                file=sys.stderr,
            )
            return EXIT_NOT_CONVERGED

    report = contraction_report(
        system, gpm_to_cfs(result.flows_gpm), result.trace, config.flow_floor_cfs
    )
    print(f"rho={report.spectral_radius:.4f}")
    print(f"local_contraction={'true' if report.is_local_contraction else 'false'}")
    print(f"alpha={report.rate_estimate:.4f}")
    if report.empirical_ratio is not None:
        print(f"empirical_ratio={report.empirical_ratio:.4f}")
    if args.out:
        _emit_document(solution_document(system, result, report), args.out)
    return EXIT_OK if report.is_local_contraction else EXIT_NOT_CONTRACTION


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "solve":
            return _cmd_solve(args)
        return _cmd_analyze(args)
    except (HydronetError, OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
