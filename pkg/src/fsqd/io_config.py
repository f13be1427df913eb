"""File formats: states, Hamiltonians, schedules, run configs, reports.

All documents are JSON except the delimited report form. Complex numbers are
written as ``[re, im]`` pairs; floats are emitted with 17 significant digits
so a parse → serialize → parse cycle reproduces every value bit-for-bit.
Out-of-domain report entries are ``null`` in JSON and empty cells in CSV.

Extension conventions: ``.state.json``, ``.ham.json``, ``.sched.json``,
``.report.csv`` / ``.report.json``, ``.traj.csv`` / ``.traj.json``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .dynamics import HamiltonianSchedule, Trajectory
from .exceptions import HermiticityError, NormalizationError, ParseError
from .quantum_types import HermitianOperator, StateVector, normalize
from .survival import SurvivalReport

__all__ = [
    "RunConfig",
    "CSV_REPORT_HEADER",
    "parse_state",
    "serialize_state",
    "parse_hamiltonian",
    "serialize_hamiltonian",
    "parse_schedule",
    "serialize_schedule",
    "parse_config",
    "parse_report",
    "serialize_report",
    "serialize_trajectory",
    "load_state",
    "load_hamiltonian",
    "load_schedule",
    "load_config",
]

CSV_REPORT_HEADER = "t,amp_abs,prob,predicted,predicted_in_domain,mt_bound,w_empirical,w_closed"

_REPORT_KEYS = (
    "t",
    "amp_abs",
    "prob",
    "predicted",
    "predicted_in_domain",
    "mt_bound",
    "w_empirical",
    "w_closed",
    "violations",
)


# ---------------------------------------------------------------------------
# canonical writing
# ---------------------------------------------------------------------------


def format_float(x: float) -> str:
    """17-significant-digit decimal form that round-trips a double exactly."""
    if math.isnan(x):
        raise ValueError("NaN has no direct representation; use null / empty cell")
    if math.isinf(x):
        raise ValueError("non-finite value cannot be serialized")
    text = format(float(x), ".17g")
    if "e" not in text and "E" not in text and "." not in text:
        text += ".0"
    return text


def _dump(value: Any) -> str:
    """Compact JSON with fixed float formatting; dict order is preserved."""
    if value is None:
        return "null"
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        if math.isnan(value):
            return "null"
        return format_float(float(value))
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, (list, tuple, np.ndarray)):
        return "[" + ",".join(_dump(v) for v in value) + "]"
    if isinstance(value, dict):
        parts = []
        for key, item in value.items():
            parts.append(f"{json.dumps(str(key))}:{_dump(item)}")
        return "{" + ",".join(parts) + "}"
    raise TypeError(f"cannot serialize value of type {type(value).__name__}")


def _pair(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def serialize_state(state: StateVector) -> str:
    pairs = ",".join(_dump(_pair(z)) for z in state.amplitudes)
    return f'{{\n  "dim": {state.dim},\n  "amplitudes": [{pairs}]\n}}\n'


def serialize_hamiltonian(H: HermitianOperator) -> str:
    rows = ",\n  ".join(
        _dump([_pair(z) for z in row]) for row in np.asarray(H.matrix)
    )
    return f"[\n  {rows}\n]\n"


def serialize_schedule(sched: HamiltonianSchedule) -> str:
    if sched.kind == "sampled":
        raise ValueError("sampled schedules have no file representation")
    segments = []
    for t_start, op in zip(sched.breakpoints, sched.operators):
        matrix = [[_pair(z) for z in row] for row in np.asarray(op.matrix)]
        segments.append(
            f'{{"t_start":{format_float(float(t_start))},"matrix":{_dump(matrix)}}}'
        )
    body = ",\n  ".join(segments)
    return f"[\n  {body}\n]\n"


def serialize_report(report: SurvivalReport, format: str = "csv") -> str:
    """Render a report as CSV (fixed column schema) or JSON (adds violations)."""
    if format == "csv":
        lines = [CSV_REPORT_HEADER]
        for k in range(len(report)):
            cells = [
                _cell(report.times[k]),
                _cell(report.amplitude_abs[k]),
                _cell(report.probability[k]),
                _cell(report.predicted_abs[k]),
                "true" if report.predicted_in_domain[k] else "false",
                _cell(report.mt_bound[k]),
                _cell(report.decay_rate_empirical[k]),
                _cell(report.decay_rate_closed[k]),
            ]
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"
    if format == "json":
        violations = None
        if report.violations is not None:
            violations = [[i, m] for i, m in report.violations]
        fields = {
            "t": report.times,
            "amp_abs": report.amplitude_abs,
            "prob": report.probability,
            "predicted": report.predicted_abs,
            "predicted_in_domain": report.predicted_in_domain,
            "mt_bound": report.mt_bound,
            "w_empirical": report.decay_rate_empirical,
            "w_closed": report.decay_rate_closed,
            "violations": violations,
        }
        body = ",\n  ".join(f'"{key}": {_dump(value)}' for key, value in fields.items())
        return f"{{\n  {body}\n}}\n"
    raise ValueError(f"unknown report format {format!r}; expected 'csv' or 'json'")


def _cell(x: float) -> str:
    return "" if math.isnan(x) else format_float(x)


def serialize_trajectory(traj: Trajectory, format: str = "json") -> str:
    if format == "json":
        states = [[_pair(z) for z in s.amplitudes] for s in traj.states]
        fields = {
            "times": traj.times,
            "states": states,
            "schedule_digest": dict(traj.schedule_digest),
        }
        body = ",\n  ".join(f'"{key}": {_dump(value)}' for key, value in fields.items())
        return f"{{\n  {body}\n}}\n"
    if format == "csv":
        dim = traj.dim
        header = ["t"]
        for i in range(dim):
            header += [f"re_{i}", f"im_{i}"]
        lines = [",".join(header)]
        for t, state in zip(traj.times, traj.states):
            cells = [format_float(float(t))]
            for z in state.amplitudes:
                cells += [format_float(z.real), format_float(z.imag)]
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown trajectory format {format!r}; expected 'csv' or 'json'")


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------


def _reject_constant(token: str) -> Any:
    raise ParseError(f"non-finite literal {token!r} is not allowed; use null")


def _loads(text: str) -> Any:
    try:
        return json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc


def _as_object(doc: Any, ctx: str, required: tuple[str, ...], optional: tuple[str, ...] = ()) -> dict:
    if not isinstance(doc, dict):
        raise ParseError(f"{ctx}: expected an object, got {type(doc).__name__}")
    for key in required:
        if key not in doc:
            raise ParseError(f"{ctx}: missing required field '{key}'")
    for key in doc:
        if key not in required and key not in optional:
            raise ParseError(f"{ctx}: unknown field '{key}'")
    return doc


def _as_number(value: Any, ctx: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"{ctx}: expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ParseError(f"{ctx}: number must be finite, got {value!r}")
    return float(value)


def _as_int(value: Any, ctx: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParseError(f"{ctx}: expected an integer, got {value!r}")
    return value


def _as_complex(value: Any, ctx: str) -> complex:
    if not isinstance(value, list) or len(value) != 2:
        raise ParseError(f"{ctx}: expected a [re, im] pair, got {value!r}")
    return complex(_as_number(value[0], f"{ctx}[0]"), _as_number(value[1], f"{ctx}[1]"))


def parse_state(text: str) -> StateVector:
    """Parse a state document; rejects non-normalized input unless it opts in.

    Schema: ``{"dim": N, "amplitudes": [[re, im], ...], "normalize": bool?}``.
    """
    doc = _as_object(_loads(text), "state", ("dim", "amplitudes"), ("normalize",))
    dim = _as_int(doc["dim"], "dim")
    if dim < 2:
        raise ParseError(f"dim: must be at least 2, got {dim}")
    raw = doc["amplitudes"]
    if not isinstance(raw, list):
        raise ParseError(f"amplitudes: expected an array, got {type(raw).__name__}")
    if len(raw) != dim:
        raise ParseError(f"amplitudes: expected {dim} entries, got {len(raw)}")
    amps = [_as_complex(v, f"amplitudes[{i}]") for i, v in enumerate(raw)]
    renorm = doc.get("normalize", False)
    if not isinstance(renorm, bool):
        raise ParseError(f"normalize: expected a boolean, got {renorm!r}")
    try:
        state = StateVector(np.array(amps))
    except ValueError as exc:
        raise ParseError(f"amplitudes: {exc}") from exc
    if renorm:
        return normalize(state)
    if not state.is_normalized():
        raise NormalizationError(
            f"amplitudes: state norm is {state.norm!r}, deviating from 1 beyond "
            'tolerance; set "normalize": true to renormalize'
        )
    return state


def _parse_matrix(doc: Any, ctx: str) -> np.ndarray:
    if not isinstance(doc, list) or not doc:
        raise ParseError(f"{ctx}: expected a non-empty array of rows")
    n = len(doc)
    matrix = np.zeros((n, n), dtype=np.complex128)
    for i, row in enumerate(doc):
        if not isinstance(row, list):
            raise ParseError(f"{ctx}[{i}]: expected an array, got {type(row).__name__}")
        if len(row) != n:
            raise ParseError(
                f"{ctx}[{i}]: matrix must be square; expected {n} entries, got {len(row)}"
            )
        for j, value in enumerate(row):
            matrix[i, j] = _as_complex(value, f"{ctx}[{i}][{j}]")
    return matrix


def parse_hamiltonian(text: str) -> HermitianOperator:
    """Parse a dense N×N matrix of [re, im] pairs; validates Hermiticity."""
    matrix = _parse_matrix(_loads(text), "matrix")
    try:
        return HermitianOperator(matrix)
    except HermiticityError:
        # already carries the deviation and 1-based indices
        raise
    except ValueError as exc:
        raise ParseError(f"matrix: {exc}") from exc


def parse_schedule(text: str) -> HamiltonianSchedule:
    """Parse ``[{"t_start": t, "matrix": [...]}, ...]``.

    A single segment starting at t = 0 is treated as a constant schedule;
    anything else is piecewise-constant with the given breakpoints.
    """
    doc = _loads(text)
    if not isinstance(doc, list) or not doc:
        raise ParseError("schedule: expected a non-empty array of segments")
    segments = []
    for i, seg in enumerate(doc):
        seg = _as_object(seg, f"schedule[{i}]", ("t_start", "matrix"))
        t_start = _as_number(seg["t_start"], f"schedule[{i}].t_start")
        matrix = _parse_matrix(seg["matrix"], f"schedule[{i}].matrix")
        try:
            op = HermitianOperator(matrix)
        except HermiticityError:
            raise
        except ValueError as exc:
            raise ParseError(f"schedule[{i}].matrix: {exc}") from exc
        segments.append((t_start, op))
    if len(segments) == 1 and segments[0][0] == 0.0:
        return HamiltonianSchedule.constant(segments[0][1])
    try:
        return HamiltonianSchedule.piecewise_constant(segments)
    except ValueError as exc:
        raise ParseError(f"schedule: {exc}") from exc


@dataclass(frozen=True)
class RunConfig:
    """A resolved evolution run: physics inputs plus output routing.

    ``t_end = None`` means "use the in-domain window πℏ/(2ΔH)", resolved by
    the runner once the effective ℏ is known (the environment may override
    the configured value).
    """

    hbar: float
    t_end: Optional[float]
    steps: int
    schedule: HamiltonianSchedule
    initial_state: StateVector
    output_format: Optional[str] = None
    output_path: Optional[str] = None
    seed: Optional[int] = None

    def __post_init__(self):
        if not (math.isfinite(self.hbar) and self.hbar > 0):
            raise ParseError(f"hbar: must be positive and finite, got {self.hbar!r}")
        if self.t_end is not None and not (math.isfinite(self.t_end) and self.t_end > 0):
            raise ParseError(f"t_end: must be positive and finite, got {self.t_end!r}")
        if self.steps < 1:
            raise ParseError(f"steps: must be at least 1, got {self.steps}")
        if self.output_format not in (None, "csv", "json"):
            raise ParseError(
                f"outputs.format: expected 'csv' or 'json', got {self.output_format!r}"
            )
        if self.seed is not None and self.seed < 0:
            raise ParseError(f"seed: must be non-negative, got {self.seed}")
        if self.schedule.dim != self.initial_state.dim:
            raise ParseError(
                f"schedule and initial_state have mismatched dimensions: "
                f"{self.schedule.dim} vs {self.initial_state.dim}"
            )


def _resolve_source(value: Any, field: str, base_dir: Optional[Path], parser):
    if isinstance(value, str):
        path = Path(value)
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        if not path.is_file():
            raise ParseError(f"{field}: referenced file not found: {path}")
        try:
            return parser(path.read_text())
        except ParseError as exc:
            raise ParseError(f"{field} ({path}): {exc}") from exc
    try:
        return parser(_dump(value))
    except ParseError as exc:
        raise ParseError(f"{field}: {exc}") from exc


DEFAULT_STEPS = 1024


def parse_config(text: str, base_dir: str | Path | None = None) -> RunConfig:
    """Parse a run configuration.

    ``schedule`` and ``initial_state`` may be inline documents or paths to
    files (resolved against ``base_dir``, typically the config's directory).
    ``t_end`` defaults to the in-domain window πℏ/(2ΔH) and ``steps`` to
    1024 when omitted.
    """
    doc = _as_object(
        _loads(text),
        "config",
        ("schedule", "initial_state"),
        ("hbar", "t_end", "steps", "outputs", "seed"),
    )
    base = Path(base_dir) if base_dir is not None else None
    hbar = _as_number(doc.get("hbar", 1.0), "hbar")
    t_end = _as_number(doc["t_end"], "t_end") if "t_end" in doc else None
    steps = _as_int(doc["steps"], "steps") if "steps" in doc else DEFAULT_STEPS
    schedule = _resolve_source(doc["schedule"], "schedule", base, parse_schedule)
    state = _resolve_source(doc["initial_state"], "initial_state", base, parse_state)
    output_format = None
    output_path = None
    if "outputs" in doc:
        outputs = _as_object(doc["outputs"], "outputs", ("format", "path"))
        output_format = outputs["format"]
        if not isinstance(output_format, str):
            raise ParseError(f"outputs.format: expected a string, got {output_format!r}")
        output_path = outputs["path"]
        if not isinstance(output_path, str) or not output_path:
            raise ParseError(f"outputs.path: expected a non-empty string, got {output_path!r}")
    seed = None
    if "seed" in doc:
        seed = _as_int(doc["seed"], "seed")
    return RunConfig(
        hbar=hbar,
        t_end=t_end,
        steps=steps,
        schedule=schedule,
        initial_state=state,
        output_format=output_format,
        output_path=output_path,
        seed=seed,
    )


def _float_array(values: Any, ctx: str, allow_null: bool) -> np.ndarray:
    if not isinstance(values, list):
        raise ParseError(f"{ctx}: expected an array")
    out = np.empty(len(values), dtype=np.float64)
    for i, v in enumerate(values):
        if v is None:
            if not allow_null:
                raise ParseError(f"{ctx}[{i}]: null is not allowed here")
            out[i] = np.nan
        else:
            out[i] = _as_number(v, f"{ctx}[{i}]")
    return out


def parse_report(text: str) -> SurvivalReport:
    """Parse the JSON report form back into a SurvivalReport."""
    doc = _as_object(_loads(text), "report", _REPORT_KEYS)
    times = _float_array(doc["t"], "t", allow_null=False)
    amp = _float_array(doc["amp_abs"], "amp_abs", allow_null=False)
    prob = _float_array(doc["prob"], "prob", allow_null=False)
    predicted = _float_array(doc["predicted"], "predicted", allow_null=True)
    flags_raw = doc["predicted_in_domain"]
    if not isinstance(flags_raw, list):
        raise ParseError("predicted_in_domain: expected an array")
    flags = np.empty(len(flags_raw), dtype=np.bool_)
    for i, v in enumerate(flags_raw):
        if not isinstance(v, bool):
            raise ParseError(f"predicted_in_domain[{i}]: expected a boolean, got {v!r}")
        flags[i] = v
    mt_bound = _float_array(doc["mt_bound"], "mt_bound", allow_null=True)
    w_emp = _float_array(doc["w_empirical"], "w_empirical", allow_null=True)
    w_closed = _float_array(doc["w_closed"], "w_closed", allow_null=False)
    violations_raw = doc["violations"]
    violations = None
    if violations_raw is not None:
        if not isinstance(violations_raw, list):
            raise ParseError("violations: expected an array or null")
        violations = []
        for i, item in enumerate(violations_raw):
            if not isinstance(item, list) or len(item) != 2:
                raise ParseError(f"violations[{i}]: expected an [index, magnitude] pair")
            violations.append(
                (_as_int(item[0], f"violations[{i}][0]"), _as_number(item[1], f"violations[{i}][1]"))
            )
        violations = tuple(violations)
    try:
        return SurvivalReport(
            times=times,
            amplitude_abs=amp,
            probability=prob,
            predicted_abs=predicted,
            predicted_in_domain=flags,
            mt_bound=mt_bound,
            decay_rate_empirical=w_emp,
            decay_rate_closed=w_closed,
            violations=violations,
        )
    except ValueError as exc:
        raise ParseError(f"report: {exc}") from exc


# ---------------------------------------------------------------------------
# path-level helpers
# ---------------------------------------------------------------------------


def _load(path: str | Path, parser, what: str):
    p = Path(path)
    if not p.is_file():
        raise ParseError(f"{what}: file not found: {p}")
    try:
        return parser(p.read_text())
    except ParseError as exc:
        raise ParseError(f"{what} ({p}): {exc}") from exc


def load_state(path: str | Path) -> StateVector:
    return _load(path, parse_state, "state")


def load_hamiltonian(path: str | Path) -> HermitianOperator:
    return _load(path, parse_hamiltonian, "hamiltonian")


def load_schedule(path: str | Path) -> HamiltonianSchedule:
    return _load(path, parse_schedule, "schedule")


def load_config(path: str | Path) -> RunConfig:
    p = Path(path)
    if not p.is_file():
        raise ParseError(f"config: file not found: {p}")
    try:
        return parse_config(p.read_text(), base_dir=p.parent)
    except ParseError as exc:
        raise ParseError(f"config ({p}): {exc}") from exc
