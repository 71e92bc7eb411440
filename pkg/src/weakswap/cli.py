"""Command-line entry point.

    weakswap simulate   --phi 0.5 --basis-a 0.8 --alpha-sq 0.55 --trials 10 --out run/
    weakswap montecarlo --phi 0.3 --basis-a 1 --alpha-sq 0.7 --steps 50 --trials 100000
    weakswap enumerate  --phi 0.5 --basis-a 0.8 --alpha-sq 0.55 --depth 12
    weakswap povm       --povm povm.yaml --alpha-sq 0.55 --trials 100000
    weakswap validate

Exit codes: 0 success, 1 runtime failure, 2 invalid configuration,
3 validation-suite failure.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

from . import __version__
from .config import MODES, ConfigError, SimConfig
from .harness import monte_carlo, oracle_p_b0, povm_monte_carlo, run_trials, step_records, summaries
from .oracle import MAX_DEPTH, convergence_table, enumerate_exact
from .output import (
    CONVERGENCE_SCHEMA,
    ENUM_SCHEMA,
    emit_outputs,
    fmt,
    json_line,
    write_csv,
    write_summary,
)
from .povm import POVMError, exact_povm_probs, load_povm, mixed_probs
from .validation import run_validation

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG, EXIT_VALIDATION = 0, 1, 2, 3

log = logging.getLogger("weakswap")

FLAG_FIELDS = {
    "phi": "phi", "basis_a": "basis_a", "chi": "chi", "alpha_sq": "alpha_sq",
    "psi_phase": "psi_phase", "steps": "n_max", "eta": "eta", "trials": "trials",
    "seed": "seed", "out": "out_path", "povm": "povm_path", "depth": "enum_depth",
    "workers": "workers",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="weakswap", description="Destructive weak-swap measurement simulator.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="mode", required=True, parser_class=_Parser)
    for mode in MODES:
        p = sub.add_parser(mode)
        p.add_argument("--config", help="config file (field: value lines); flags override it")
        p.add_argument("--phi", type=float, help="swap strength in (0, pi/2)")
        p.add_argument("--basis-a", type=float, help="|<0|b0>| of the target basis")
        p.add_argument("--chi", type=float, help="relative phase of b0")
        p.add_argument("--alpha-sq", type=float, help="|alpha|^2 of the initial state in the target basis")
        p.add_argument("--psi-phase", type=float, help="relative phase between alpha and beta")
        p.add_argument("--steps", type=int, help="maximum number of weak measurements (default 200)")
        p.add_argument("--eta", type=float, help="early-stop basis distance (default 1e-6)")
        p.add_argument("--trials", type=int, help="number of trajectories (default 10000)")
        p.add_argument("--seed", type=int, help="64-bit seed (default 42)")
        p.add_argument("--out", help="output directory (default ./out)")
        p.add_argument("--povm", help="POVM specification file")
        p.add_argument("--depth", type=int, help="enumeration depth")
        p.add_argument("--workers", type=int, help="worker processes (results do not depend on it)")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def config_from_args(args) -> SimConfig:
    data = {}
    if args.config:
        try:
            data.update(SimConfig.from_text(Path(args.config).read_text(encoding="utf-8")).__dict__)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
    for flag, field in FLAG_FIELDS.items():
        value = getattr(args, flag)
        if value is not None:
            data[field] = value
    data["mode"] = args.mode
    return SimConfig.from_mapping(data)


def _write_config(out: Path, cfg: SimConfig) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.yaml").write_text(cfg.to_text(), encoding="utf-8", newline="\n")


def _write_aggregate(out: Path, fields: dict) -> None:
    line = json_line(list(fields), list(fields.values()))
    (out / "aggregate.json").write_text(line + "\n", encoding="utf-8", newline="\n")


def _report_counts(agg) -> dict:
    fields = {"trials": agg.trials, "mean_steps": agg.mean_steps}
    for lab, c, f, se in zip(agg.labels, agg.counts, agg.frequencies, agg.std_errors):
        fields[f"count_{lab}"] = int(c)
        fields[f"freq_{lab}"] = float(f)
        fields[f"stderr_{lab}"] = float(se)
    return fields


def cmd_simulate(cfg: SimConfig) -> int:
    res = run_trials(cfg, log_steps=True)
    out = Path(cfg.out_path)
    _write_config(out, cfg)
    steps_path, summary_path = emit_outputs(out, step_records(res), summaries(res))
    print(f"wrote {steps_path} and {summary_path}")
    return EXIT_OK


def cmd_montecarlo(cfg: SimConfig) -> int:
    agg, res = monte_carlo(cfg)
    out = Path(cfg.out_path)
    _write_config(out, cfg)
    write_summary(out / "summary.csv", summaries(res))
    fields = _report_counts(agg)
    fields["born_alpha_sq"] = cfg.alpha_sq
    depth, p_exact = oracle_p_b0(cfg, cfg.enum_depth)
    fields["oracle_depth"] = depth
    fields["oracle_p_b0"] = p_exact
    se = math.sqrt(max(p_exact * (1 - p_exact), 1e-300) / max(cfg.trials, 1))
    fields["z_vs_oracle"] = (float(agg.frequencies[0]) - p_exact) / se if cfg.trials else 0.0
    _write_aggregate(out, fields)
    for k, v in fields.items():
        print(f"{k:>16s}: {fmt(v) if isinstance(v, float) else v}")
    return EXIT_OK


def cmd_enumerate(cfg: SimConfig) -> int:
    depth = cfg.enum_depth if cfg.enum_depth is not None else min(cfg.n_max, 12)
    state, basis = cfg.initial_state(), cfg.basis
    res = enumerate_exact(state, basis, cfg.phi, depth, per_string=depth <= 14 or None)
    out = Path(cfg.out_path)
    _write_config(out, cfg)
    if res.per_string is not None:
        write_csv(out / "enumeration.csv", ENUM_SCHEMA, ("string", "probability", "d_basis", "conclusion"),
                  ((r.string, r.probability, r.distance, r.conclusion) for r in res.per_string))
    grid = sorted({n for n in (1, 2, 4, 8, 12, 16, 20, depth) if n <= depth and (n <= MAX_DEPTH or basis.is_computational)})
    rows = convergence_table(state, basis, cfg.phi, grid)
    write_csv(out / "convergence.csv", CONVERGENCE_SCHEMA, ("n", "gap", "cos_2n_phi", "max_d_basis"),
              ((r.n, r.gap, r.cos_term, r.max_distance) for r in rows))
    fields = {"depth": depth, "p_b0": res.p_b0, "p_b1": res.p_b1, "p_undecided": res.p_undecided,
              "sum_lambda0": res.sum_lambda0, "sum_lambda1": res.sum_lambda1, "leaves": res.n_leaves}
    _write_aggregate(out, fields)
    for k, v in fields.items():
        print(f"{k:>12s}: {fmt(v) if isinstance(v, float) else v}")
    return EXIT_OK


def cmd_povm(cfg: SimConfig) -> int:
    povm = load_povm(cfg.povm_path)
    agg, res, outcomes = povm_monte_carlo(cfg, povm)
    out = Path(cfg.out_path)
    _write_config(out, cfg)
    write_summary(out / "summary.csv", summaries(res, labels=[str(int(j)) for j in outcomes]))
    fields = _report_counts(agg)
    state = cfg.initial_state(povm.basis)
    for j, pj in enumerate(exact_povm_probs(state, povm), start=1):
        fields[f"exact_{j}"] = float(pj)
    if not povm.basis.is_computational:
        sub = SimConfig(**{**cfg.__dict__, "basis_a": povm.basis.a, "chi": povm.basis.chi, "mode": "montecarlo"})
        depth, p_b0 = oracle_p_b0(sub, cfg.enum_depth)
        fields["oracle_depth"] = depth
        for j, pj in enumerate(mixed_probs(povm, p_b0, 1.0 - p_b0), start=1):
            fields[f"oracle_{j}"] = float(pj)
    _write_aggregate(out, fields)
    for k, v in fields.items():
        print(f"{k:>12s}: {fmt(v) if isinstance(v, float) else v}")
    return EXIT_OK


def cmd_validate(cfg: SimConfig) -> int:
    checks = run_validation(cfg.seed)
    lines = [c.line() for c in checks]
    ok = all(c.passed for c in checks)
    lines.append(f"{'ALL PASS' if ok else 'FAILURES'}: {sum(c.passed for c in checks)}/{len(checks)}")
    out = Path(cfg.out_path)
    out.mkdir(parents=True, exist_ok=True)
    (out / "validate.txt").write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    print("\n".join(lines))
    return EXIT_OK if ok else EXIT_VALIDATION


COMMANDS = {"simulate": cmd_simulate, "montecarlo": cmd_montecarlo, "enumerate": cmd_enumerate,
            "povm": cmd_povm, "validate": cmd_validate}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(args)
        if cfg.mode == "enumerate" and cfg.enum_depth and cfg.enum_depth > MAX_DEPTH and not cfg.basis.is_computational:
            raise ConfigError(f"depth must be <= {MAX_DEPTH} for a non-computational basis")
    except (ConfigError, POVMError) as exc:
        print(f"weakswap: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[cfg.mode](cfg)
    except POVMError as exc:
        print(f"weakswap: {exc}", file=sys.stderr)
        return EXIT_CONFIG if "line" in str(exc) else EXIT_RUNTIME
    except OSError as exc:
        print(f"weakswap: I/O error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (ValueError, RuntimeError) as exc:
        print(f"weakswap: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
