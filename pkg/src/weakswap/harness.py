"""Seeded Monte Carlo batches over trial-index substreams."""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .batch import B0, B1, CONCLUSION_NAMES, UNDECIDED, BatchResult, StepLog, run_batch
from .config import SimConfig
from .oracle import MAX_DEPTH, enumerate_exact
from .output import TrialSummary
from .povm import CommutingPOVM, run_povm_batch


# Trials run in fixed blocks of absolute trial indices. Workers only decide
# which process handles a block, so every trial sees the same array sizes
# and numpy takes the same arithmetic paths whatever the worker count.
BLOCK = 4096


def _chunks(n: int) -> list[range]:
    if n == 0:
        return [range(0)]
    return [range(lo, min(n, lo + BLOCK)) for lo in range(0, n, BLOCK)]


def _merge(parts: list[BatchResult]) -> BatchResult:
    if len(parts) == 1:
        return parts[0]
    cat = {f: np.concatenate([getattr(p, f) for p in parts]) for f in (
        "trials", "conclusion", "steps", "final_a", "final_chi", "eps_abs",
        "min_anc_overlap", "max_lower_left")}
    log = None
    if parts[0].log is not None:
        log = StepLog(*(np.concatenate([getattr(p.log, f) for p in parts], axis=1)
                        for f in StepLog.__dataclass_fields__))
    return BatchResult(**cat, log=log)


def _batch_job(args):
    return run_batch(*args)


def run_trials(cfg: SimConfig, log_steps: bool = False) -> BatchResult:
    """All cfg.trials trajectories, in fixed trial blocks spread over cfg.workers processes."""
    state, basis = cfg.initial_state(), cfg.basis
    jobs = [(state, basis, cfg.phi, cfg.n_max, cfg.eta, cfg.seed, r, log_steps)
            for r in _chunks(cfg.trials)]
    if cfg.workers == 1 or len(jobs) == 1:
        parts = [_batch_job(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            parts = list(pool.map(_batch_job, jobs))
    return _merge(parts)


@dataclass
class Aggregate:
    labels: tuple[str, ...]
    counts: np.ndarray
    trials: int
    mean_steps: float

    @property
    def frequencies(self) -> np.ndarray:
        return self.counts / max(self.trials, 1)

    @property
    def std_errors(self) -> np.ndarray:
        f = self.frequencies
        return np.sqrt(f * (1.0 - f) / max(self.trials, 1))


def summaries(res: BatchResult, labels=None) -> list[TrialSummary]:
    labels = labels if labels is not None else [CONCLUSION_NAMES[c] for c in res.conclusion]
    d = res.final_distance
    return [
        TrialSummary(int(t), str(lab), int(s), float(dd), float(e))
        for t, lab, s, dd, e in zip(res.trials, labels, res.steps, d, res.eps_abs)
    ]


def step_records(res: BatchResult):
    """Yield JSONL step tuples in (trial, step) order."""
    log = res.log
    for col, trial in enumerate(res.trials):
        for n in range(int(res.steps[col])):
            a = float(log.a[n, col])
            a2 = a * a
            yield (int(trial), n + 1, int(log.outcome[n, col]), float(log.prob[n, col]),
                   float(log.lam_b0[n, col]), float(log.lam_b1[n, col]), a, float(log.chi[n, col]),
                   min(a2, 1.0 - a2), float(log.eps_abs[n, col]))


def monte_carlo(cfg: SimConfig) -> tuple[Aggregate, BatchResult]:
    res = run_trials(cfg)
    counts = np.array([np.sum(res.conclusion == c) for c in (B0, B1, UNDECIDED)], dtype=float)
    mean_steps = float(res.steps.mean()) if res.steps.size else 0.0
    return Aggregate(CONCLUSION_NAMES, counts, cfg.trials, mean_steps), res


def oracle_p_b0(cfg: SimConfig, depth: int | None = None) -> tuple[int, float]:
    """Exact P(B0) at the requested depth, or the deepest feasible one."""
    basis = cfg.basis
    if depth is None:
        depth = cfg.n_max if basis.is_computational else min(cfg.n_max, 16)
    if not basis.is_computational:
        depth = min(depth, MAX_DEPTH)
    return depth, enumerate_exact(cfg.initial_state(), basis, cfg.phi, depth, per_string=False).p_b0


def _povm_job(args):
    _, out, res = run_povm_batch(*args)
    return out, res


def povm_monte_carlo(cfg: SimConfig, povm: CommutingPOVM) -> tuple[Aggregate, BatchResult, np.ndarray]:
    state = cfg.initial_state(povm.basis)
    jobs = [(state, povm, cfg.phi, cfg.n_max, cfg.eta, cfg.seed, r) for r in _chunks(cfg.trials)]
    if cfg.workers == 1 or len(jobs) <= 1:
        parts = [_povm_job(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            parts = list(pool.map(_povm_job, jobs))
    if parts:
        out = np.concatenate([p[0] for p in parts])
        res = _merge([p[1] for p in parts])
    else:
        out = np.zeros(0, dtype=np.int64)
        res = run_batch(state, povm.basis, cfg.phi, cfg.n_max, cfg.eta, cfg.seed, [])
    counts = np.array([np.sum(out == j) for j in range(1, povm.m + 1)], dtype=float)
    labels = tuple(str(j) for j in range(1, povm.m + 1))
    mean_steps = float(res.steps.mean()) if res.steps.size else 0.0
    return Aggregate(labels, counts, cfg.trials, mean_steps), res, out
