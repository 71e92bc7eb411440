"""Commuting-element POVMs by projective measurement plus classical postprocessing.

The projective stage runs the weak-swap protocol in the common eigenbasis;
the final outcome is then drawn from the weight column selected by the
projective result. Only the final outcome is returned.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import yaml

from .batch import B0, UNDECIDED, run_batch
from .construction import BasisParams, basis_vectors
from .rng import POST_STREAM, first_uniform
from .trajectory import Conclusion, RandomStream, run_trajectory

log = logging.getLogger(__name__)

WEIGHT_TOL = 1e-12


class POVMError(ValueError):
    pass


@dataclass(frozen=True)
class CommutingPOVM:
    """Elements E_j = w_j0 |b0><b0| + w_j1 |b1><b1|, j = 1..m."""

    basis: BasisParams
    weights: tuple[tuple[float, float], ...]

    @property
    def m(self) -> int:
        return len(self.weights)

    def column(self, j: int) -> np.ndarray:
        return np.array([w[j] for w in self.weights], dtype=float)


def validate_povm(p: CommutingPOVM) -> None:
    if p.m < 2:
        raise POVMError(f"a POVM needs at least 2 elements, got {p.m}")
    for i, (w0, w1) in enumerate(p.weights, start=1):
        for col, w in ((0, w0), (1, w1)):
            if not (np.isfinite(w) and 0.0 <= w <= 1.0):
                raise POVMError(f"weight w_{i}{col} = {w!r} outside [0, 1]")
    for col in (0, 1):
        total = float(np.sum(p.column(col)))
        if abs(total - 1.0) > WEIGHT_TOL:
            raise POVMError(f"weights on b{col} sum to {total!r}, not 1 (column {col})")


def sample_final(projective_outcome: Conclusion | str, p: CommutingPOVM, u: float) -> int:
    """Inverse-CDF draw of the 1-based outcome index from the selected column."""
    outcome = Conclusion(projective_outcome)
    if outcome is Conclusion.UNDECIDED:
        raise POVMError("undecided projective stage")
    col = p.column(0 if outcome is Conclusion.B0 else 1)
    cdf = np.cumsum(col)
    j = int(np.searchsorted(cdf, u, side="right"))
    # round-off can leave cdf[-1] a hair below 1
    return min(j, p.m - 1) + 1


def exact_povm_probs(state: np.ndarray, p: CommutingPOVM) -> np.ndarray:
    b0, b1 = basis_vectors(p.basis)
    al2 = abs(np.vdot(b0, state)) ** 2
    be2 = abs(np.vdot(b1, state)) ** 2
    return p.column(0) * al2 + p.column(1) * be2


def mixed_probs(p: CommutingPOVM, p_b0: float, p_b1: float) -> np.ndarray:
    """Outcome distribution given projective-stage probabilities p_b0, p_b1."""
    return p.column(0) * p_b0 + p.column(1) * p_b1


def run_povm_measurement(
    state: np.ndarray,
    p: CommutingPOVM,
    phi: float,
    n_max: int,
    eta: float,
    rng: RandomStream,
) -> int:
    traj = run_trajectory(state, p.basis, phi, n_max, eta, rng)
    if traj.conclusion is Conclusion.UNDECIDED:
        raise POVMError("undecided projective stage")
    u = rng.post_uniform()
    j = sample_final(traj.conclusion, p, u)
    log.debug("trial %d: projective %s, u=%r -> outcome %d", rng.trial, traj.conclusion.value, u, j)
    return j


def run_povm_batch(state, p: CommutingPOVM, phi, n_max, eta, seed, trials):
    """Vectorized :func:`run_povm_measurement`; returns (trials, outcomes, batch result)."""
    res = run_batch(state, p.basis, phi, n_max, eta, seed, trials)
    if np.any(res.conclusion == UNDECIDED):
        raise POVMError("undecided projective stage")
    u = first_uniform(seed, res.trials, POST_STREAM)
    cdf0, cdf1 = np.cumsum(p.column(0)), np.cumsum(p.column(1))
    j0 = np.minimum(np.searchsorted(cdf0, u, side="right"), p.m - 1)
    j1 = np.minimum(np.searchsorted(cdf1, u, side="right"), p.m - 1)
    out = np.where(res.conclusion == B0, j0, j1) + 1
    return res.trials, out, res


# --- POVM specification files -------------------------------------------------

def _mark(node) -> str:
    return f"line {node.start_mark.line + 1}"


def _number(node, field: str) -> float:
    if not isinstance(node, yaml.ScalarNode):
        raise POVMError(f"{_mark(node)}: field '{field}' must be a number")
    try:
        return float(node.value)
    except ValueError:
        raise POVMError(f"{_mark(node)}: field '{field}' is not a number: {node.value!r}") from None


def _mapping(node, field: str) -> dict:
    if not isinstance(node, yaml.MappingNode):
        raise POVMError(f"{_mark(node)}: field '{field}' must be a mapping")
    return {k.value: v for k, v in node.value}


def parse_povm_text(text: str) -> CommutingPOVM:
    """Parse a POVM document::

        basis:
          a: 0.8
          chi: 0.0
        weights:
          - [0.5, 0.2]
          - [0.3, 0.3]
          - [0.2, 0.5]

    Errors cite the line and field.
    """
    try:
        root = yaml.compose(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}" if mark else "unknown line"
        raise POVMError(f"{where}: malformed document ({getattr(exc, 'problem', exc)})") from None
    if root is None:
        raise POVMError("line 1: empty document")
    top = _mapping(root, "<document>")
    for key in ("basis", "weights"):
        if key not in top:
            raise POVMError(f"{_mark(root)}: missing field '{key}'")
    basis_node = top["basis"]
    basis = _mapping(basis_node, "basis")
    if "a" not in basis:
        raise POVMError(f"{_mark(basis_node)}: missing field 'basis.a'")
    a = _number(basis["a"], "basis.a")
    chi = _number(basis["chi"], "basis.chi") if "chi" in basis else 0.0
    try:
        bp = BasisParams(a, chi)
    except ValueError as exc:
        raise POVMError(f"{_mark(basis['a'])}: field 'basis.a': {exc}") from None

    wnode = top["weights"]
    if not isinstance(wnode, yaml.SequenceNode):
        raise POVMError(f"{_mark(wnode)}: field 'weights' must be a list of [w0, w1] pairs")
    weights = []
    for i, item in enumerate(wnode.value, start=1):
        if not isinstance(item, yaml.SequenceNode) or len(item.value) != 2:
            raise POVMError(f"{_mark(item)}: field 'weights[{i}]' must be a pair [w0, w1]")
        weights.append(tuple(_number(v, f"weights[{i}]") for v in item.value))
    povm = CommutingPOVM(bp, tuple(weights))
    try:
        validate_povm(povm)
    except POVMError as exc:
        raise POVMError(f"{_mark(wnode)}: field 'weights': {exc}") from None
    return povm


def load_povm(path) -> CommutingPOVM:
    with open(path, encoding="utf-8") as fh:
        return parse_povm_text(fh.read())


def dump_povm(p: CommutingPOVM) -> str:
    lines = ["basis:", f"  a: {p.basis.a!r}", f"  chi: {p.basis.chi!r}", "weights:"]
    lines += [f"  - [{w0!r}, {w1!r}]" for w0, w1 in p.weights]
    return "\n".join(lines) + "\n"
