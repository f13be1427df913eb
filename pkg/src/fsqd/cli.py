"""Command-line surface: evolve, fs-distance, mt-campaign, decay-rate.

Exit codes: 0 on success, 1 for usage or parse problems, 2 when a numerical
contract is violated (non-Hermitian input, bad normalization, or a
Mandelstam-Tamm violation turning up). Report-writing commands emit the
delimited/JSON files plus a PNG figure next to them unless --no-plot is given.
The environment variable FSQD_HBAR (positive number) overrides ℏ.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dynamics import evolve_schedule, sample_trajectory
from .exceptions import (
    DimensionMismatchError,
    GridError,
    HermiticityError,
    NormalizationError,
    ParseError,
    ScheduleError,
)
from .geometry import fs_distance
from .io_config import (
    RunConfig,
    _dump as _dump_json,
    format_float,
    load_config,
    load_state,
    serialize_report,
    serialize_trajectory,
)
from .quantum_types import (
    HermitianOperator,
    PhysicalConstants,
    StateVector,
    energy_uncertainty,
)
from .survival import build_survival_report, mt_check, survival_amplitude

__all__ = ["CommandOutcome", "cmd_evolve", "cmd_fs_distance", "cmd_mt_campaign", "cmd_decay_rate", "main"]

_NUMERICAL_ERRORS = (
    NormalizationError,
    HermiticityError,
    DimensionMismatchError,
    GridError,
    ScheduleError,
)


@dataclass
class CommandOutcome:
    """Result of one CLI invocation: exit code, summary line(s), files written."""

    exit_code: int
    summary: str
    artifacts: list[str] = field(default_factory=list)


def _write(path: Path, text: str) -> str:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return str(path)


def _run_config(config: RunConfig, render_figures: bool, base_override: str | None,
                format_override: str | None):
    """Evolve per config and write report/trajectory (+ figure); shared by
    evolve and decay-rate."""
    constants = PhysicalConstants(config.hbar)
    fmt = format_override or config.output_format or "csv"
    base = base_override or config.output_path
    if base is None:
        raise ParseError(
            "no output destination: set outputs.path in the config or pass --out"
        )
    if fmt not in ("csv", "json"):
        raise ParseError(f"outputs.format: expected 'csv' or 'json', got {fmt!r}")

    sched = config.schedule
    t_end = config.t_end
    if t_end is None:
        # default grid: the in-domain window set by the bound, πℏ/(2ΔH)
        delta_h = energy_uncertainty(sched.at(0.0), config.initial_state)
        if delta_h <= 0.0:
            raise ParseError(
                "t_end: required explicitly when ΔH = 0 (a stationary state "
                "has no finite in-domain window)"
            )
        t_end = math.pi * constants.hbar / (2 * delta_h)
    if sched.kind == "constant":
        traj = sample_trajectory(
            config.initial_state, sched.at(0.0), t_end, config.steps, constants
        )
    else:
        traj = evolve_schedule(
            config.initial_state, sched, t_end, config.steps, constants
        )
    report = build_survival_report(traj, sched, constants)

    artifacts = [
        _write(Path(f"{base}.report.{fmt}"), serialize_report(report, fmt)),
        _write(Path(f"{base}.traj.{fmt}"), serialize_trajectory(traj, fmt)),
    ]
    if render_figures:
        from . import plotting  # defer matplotlib import to the figure path

        figure = Path(f"{base}.png")
        figure.parent.mkdir(parents=True, exist_ok=True)
        artifacts.append(plotting.render_survival_figure(report, figure))
    return traj, report, constants, artifacts


def cmd_evolve(
    config: RunConfig,
    render_figures: bool = True,
    base_override: str | None = None,
    format_override: str | None = None,
) -> CommandOutcome:
    """Run an evolution, write trajectory + survival report, summarize deviations."""
    traj, report, constants, artifacts = _run_config(
        config, render_figures, base_override, format_override
    )
    delta_h = energy_uncertainty(config.schedule.at(0.0), config.initial_state)
    v_d = delta_h / constants.hbar
    horizon = math.pi * constants.hbar / (2 * delta_h) if delta_h > 0 else math.inf
    in_domain = report.predicted_in_domain
    deviation = float(
        np.max(np.abs(report.amplitude_abs[in_domain] - report.predicted_abs[in_domain]))
    )
    lines = [
        f"evolved dim={traj.dim} state for t_end={format_float(float(traj.times[-1]))} "
        f"in {config.steps} steps (hbar={format_float(constants.hbar)})",
        f"ΔH = {delta_h:.12g}, decay velocity v_d = ΔH/ℏ = {v_d:.12g}",
        f"in-domain horizon πℏ/(2ΔH) = {horizon:.12g}",
        f"max in-domain |measured − predicted| = {deviation:.6e}",
        "artifacts: " + ", ".join(artifacts),
    ]
    exit_code = 0
    if report.violations:
        exit_code = 2
        lines.insert(0, f"Mandelstam-Tamm bound violated at {len(report.violations)} grid points")
    return CommandOutcome(exit_code=exit_code, summary="\n".join(lines), artifacts=artifacts)


def cmd_fs_distance(state_a: str | Path, state_b: str | Path) -> CommandOutcome:
    """Print the Fubini-Study distance between two state files, in radians."""
    a = load_state(state_a)
    b = load_state(state_b)
    return CommandOutcome(exit_code=0, summary=f"{fs_distance(a, b):.12f}")


def cmd_decay_rate(
    config: RunConfig,
    render_figures: bool = True,
    base_override: str | None = None,
    format_override: str | None = None,
) -> CommandOutcome:
    """Run an evolution and compare empirical vs closed-form decay rates."""
    traj, report, constants, artifacts = _run_config(
        config, render_figures, base_override, format_override
    )
    both = np.isfinite(report.decay_rate_empirical) & np.isfinite(report.decay_rate_closed)
    if np.any(both):
        discrepancy = float(
            np.max(
                np.abs(
                    report.decay_rate_empirical[both] - report.decay_rate_closed[both]
                )
            )
        )
        disc_text = f"{discrepancy:.6e}"
    else:
        disc_text = "n/a (fewer than 3 grid points)"
    lines = [
        f"decay rates over {len(report)} grid points (dim={traj.dim}, "
        f"t_end={format_float(float(traj.times[-1]))})",
        f"max |w_empirical − w_closed| = {disc_text}",
        "artifacts: " + ", ".join(artifacts),
    ]
    return CommandOutcome(exit_code=0, summary="\n".join(lines), artifacts=artifacts)


def _random_trial(rng: np.random.Generator, dim: int) -> tuple[StateVector, HermitianOperator]:
    raw = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    psi = StateVector(raw / np.linalg.norm(raw))
    gaussian = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    H = HermitianOperator((gaussian + gaussian.conj().T) / 2.0)
    return psi, H


def cmd_mt_campaign(
    dim_range: tuple[int, int],
    trials: int,
    seed: int,
    tol: float,
    hbar: float = 1.0,
    grid_points: int = 256,
    out: str | None = None,
    format: str = "csv",
    render_figures: bool = True,
) -> CommandOutcome:
    """Random-instance campaign checking |A_t| ≥ cos(tΔH/ℏ) − tol.

    Each trial draws a Gaussian-amplitude normalized state and a symmetrized
    complex-Gaussian Hermitian matrix, evolves exactly over a 256-point grid
    on the in-domain window [0, πℏ/(2ΔH)], and scans for bound violations.
    Per-trial seeds are pre-split from the campaign seed, so results do not
    depend on evaluation order.
    """
    lo, hi = dim_range
    if trials < 1:
        raise ParseError(f"--trials: must be at least 1, got {trials}")
    if lo < 2 or hi < lo:
        raise ParseError(f"--dims: need 2 ≤ LO ≤ HI, got {lo}..{hi}")
    if tol <= 0:
        raise ParseError(f"--tol: must be positive, got {tol!r}")
    constants = PhysicalConstants(hbar)

    children = np.random.SeedSequence(seed).spawn(trials)
    rows = []
    total_violations = 0
    min_slack = math.inf
    for index in range(trials):
        rng = np.random.default_rng(children[index])
        dim = int(rng.integers(lo, hi + 1))
        psi, H = _random_trial(rng, dim)
        delta_h = energy_uncertainty(H, psi)
        horizon = (
            math.pi * constants.hbar / (2 * delta_h) if delta_h > 1e-12 else 1.0
        )
        traj = sample_trajectory(psi, H, horizon, grid_points - 1, constants)
        violations = mt_check(traj, H, constants, tol)
        amplitude = np.abs(survival_amplitude(traj))
        angles = traj.times * (delta_h / constants.hbar)
        in_domain = angles <= math.pi / 2 + 1e-12
        slack = float(np.min(amplitude[in_domain] - np.cos(angles[in_domain])))
        min_slack = min(min_slack, slack)
        total_violations += len(violations)
        rows.append((index, dim, delta_h, horizon, slack, len(violations)))

    summary = (
        f"mt-campaign: trials={trials} dims={lo}..{hi} seed={seed} tol={tol:g} "
        f"violations={total_violations} min_slack={min_slack:.6e}"
    )
    artifacts: list[str] = []
    if out is not None:
        if format == "csv":
            lines = ["trial,dim,delta_h,horizon,min_slack,violations"]
            for index, dim, delta_h, horizon, slack, nviol in rows:
                lines.append(
                    f"{index},{dim},{format_float(delta_h)},{format_float(horizon)},"
                    f"{format_float(slack)},{nviol}"
                )
            text = "\n".join(lines) + "\n"
        elif format == "json":
            payload = {
                "trials": trials,
                "dims": [lo, hi],
                "seed": seed,
                "tol": tol,
                "violations_total": total_violations,
                "min_slack": min_slack,
                "rows": [list(row) for row in rows],
            }
            text = _dump_json(payload) + "\n"
        else:
            raise ParseError(f"--format: expected 'csv' or 'json', got {format!r}")
        artifacts.append(_write(Path(f"{out}.campaign.{format}"), text))
        if render_figures:
            from . import plotting

            figure = Path(f"{out}.png")
            figure.parent.mkdir(parents=True, exist_ok=True)
            artifacts.append(
                plotting.render_campaign_figure([r[4] for r in rows], tol, figure)
            )
        summary += "\nartifacts: " + ", ".join(artifacts)
    return CommandOutcome(
        exit_code=2 if total_violations else 0,
        summary=summary,
        artifacts=artifacts,
    )


def _parse_dims(text: str) -> tuple[int, int]:
    try:
        if ".." in text:
            lo_text, hi_text = text.split("..", 1)
            return int(lo_text), int(hi_text)
        value = int(text)
        return value, value
    except ValueError as exc:
        raise ParseError(f"--dims: expected LO..HI integers, got {text!r}") from exc


def _env_hbar() -> float | None:
    raw = os.environ.get("FSQD_HBAR")
    if raw is None:
        return None
    try:
        value = float(raw)
    except ValueError as exc:
        raise ParseError(f"FSQD_HBAR: expected a number, got {raw!r}") from exc
    if not (math.isfinite(value) and value > 0):
        raise ParseError(f"FSQD_HBAR: must be positive and finite, got {raw!r}")
    return value


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fsqd",
        description="Pure-state quantum dynamics through Fubini-Study geometry.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    evolve = sub.add_parser("evolve", help="evolve a state and write a survival report")
    evolve.add_argument("--config", required=True, help="run configuration (JSON)")
    evolve.add_argument("--format", choices=("csv", "json"), help="output format override")
    evolve.add_argument("--out", help="output base path override")
    evolve.add_argument("--no-plot", action="store_true", help="skip the PNG figure")

    dist = sub.add_parser("fs-distance", help="Fubini-Study distance between two states")
    dist.add_argument("--state-a", required=True, help="first state file")
    dist.add_argument("--state-b", required=True, help="second state file")

    campaign = sub.add_parser("mt-campaign", help="randomized Mandelstam-Tamm bound check")
    campaign.add_argument("--dims", default="2..8", help="dimension range LO..HI (default 2..8)")
    campaign.add_argument("--trials", type=int, default=1000, help="number of trials")
    campaign.add_argument("--seed", type=int, default=0, help="campaign seed")
    campaign.add_argument("--tol", type=float, default=1e-9, help="violation tolerance")
    campaign.add_argument("--out", help="base path for per-trial results")
    campaign.add_argument("--format", choices=("csv", "json"), default="csv")
    campaign.add_argument("--no-plot", action="store_true", help="skip the PNG figure")

    decay = sub.add_parser("decay-rate", help="empirical vs closed-form decay rate")
    decay.add_argument("--config", required=True, help="run configuration (JSON)")
    decay.add_argument("--format", choices=("csv", "json"), help="output format override")
    decay.add_argument("--out", help="output base path override")
    decay.add_argument("--no-plot", action="store_true", help="skip the PNG figure")

    return parser


def _dispatch(args: argparse.Namespace) -> CommandOutcome:
    hbar_override = _env_hbar()
    if args.command in ("evolve", "decay-rate"):
        config = load_config(args.config)
        if hbar_override is not None:
            config = dataclasses.replace(config, hbar=hbar_override)
        runner = cmd_evolve if args.command == "evolve" else cmd_decay_rate
        return runner(
            config,
            render_figures=not args.no_plot,
            base_override=args.out,
            format_override=args.format,
        )
    if args.command == "fs-distance":
        return cmd_fs_distance(args.state_a, args.state_b)
    if args.command == "mt-campaign":
        return cmd_mt_campaign(
            dim_range=_parse_dims(args.dims),
            trials=args.trials,
            seed=args.seed,
            tol=args.tol,
            hbar=hbar_override if hbar_override is not None else 1.0,
            out=args.out,
            format=args.format,
            render_figures=not args.no_plot,
        )
    raise ParseError(f"unknown command {args.command!r}")


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        outcome = _dispatch(args)
    except _NUMERICAL_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(outcome.summary)
    return outcome.exit_code


if __name__ == "__main__":
    sys.exit(main())
