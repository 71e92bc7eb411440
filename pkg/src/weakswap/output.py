"""JSONL step logs and CSV summaries with lossless float formatting."""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

STEPS_SCHEMA = "weakswap-steps/1"
SUMMARY_SCHEMA = "weakswap-summary/1"
ENUM_SCHEMA = "weakswap-enumeration/1"
CONVERGENCE_SCHEMA = "weakswap-convergence/1"

STEP_FIELDS = ("trial", "step", "outcome", "p", "lam_b0", "lam_b1", "a", "chi", "d_basis", "abs_eps")
SUMMARY_FIELDS = ("trial", "conclusion", "steps", "final_d", "eps_abs")


def fmt(x) -> str:
    """17 significant digits for floats; plain text for everything else."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        if not math.isfinite(x):
            return "null"
        return format(x, ".17g")
    return str(x)


def _json_value(x) -> str:
    if isinstance(x, str):
        return '"' + x.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if x is None:
        return "null"
    return fmt(x)


def json_line(fields, values) -> str:
    return "{" + ", ".join(f'"{k}": {_json_value(v)}' for k, v in zip(fields, values)) + "}"


@dataclass(frozen=True)
class TrialSummary:
    trial: int
    conclusion: str
    steps: int
    final_d: float
    eps_abs: float

    def row(self) -> tuple:
        return (self.trial, self.conclusion, self.steps, self.final_d, self.eps_abs)


def write_steps(path: Path, records) -> None:
    """records: iterable of tuples ordered as STEP_FIELDS."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json_line(("schema",), (STEPS_SCHEMA,)) + "\n")
        for rec in records:
            fh.write(json_line(STEP_FIELDS, rec) + "\n")


def write_csv(path: Path, schema: str, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# schema: {schema}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def write_summary(path: Path, summaries) -> None:
    write_csv(path, SUMMARY_SCHEMA, SUMMARY_FIELDS, (s.row() for s in summaries))


def emit_outputs(out_dir, step_records, summaries) -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    steps_path, summary_path = out / "steps.jsonl", out / "summary.csv"
    write_steps(steps_path, step_records)
    write_summary(summary_path, summaries)
    return steps_path, summary_path


def read_csv_rows(path) -> list[list[str]]:
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if not ln.startswith("#")]
    return [ln.split(",") for ln in lines[1:]]
