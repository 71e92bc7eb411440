"""Exact enumeration of every outcome string up to a fixed depth.

The tree is expanded level by level over arrays of nodes; children are
interleaved (index 2*parent + k) so leaves come out in lexicographic order
of their outcome strings. Large levels are split into contiguous chunks
and walked depth first, which keeps memory flat up to the depth cap.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .batch import B0, B1, UNDECIDED, born_weights, conclude_array
from .construction import BasisParams, check_phi
from .kernel import step_tables
from .trajectory import _advance

MAX_DEPTH = 22
CHUNK = 1 << 16
PER_STRING_DEFAULT_MAX = 14


@dataclass
class LeafRow:
    string: str
    probability: float
    distance: float
    conclusion: str


@dataclass
class EnumerationResult:
    n: int
    p_b0: float
    p_b1: float
    p_undecided: float
    sum_lambda0: float
    sum_lambda1: float
    max_distance: float
    n_leaves: int
    per_string: list[LeafRow] | None = field(default=None, repr=False)


class _Accumulator:
    def __init__(self, al2: float, be2: float, keep_strings: bool):
        self.al2, self.be2 = al2, be2
        self.p = np.zeros(3)
        self.sum_l0 = 0.0
        self.sum_l1 = 0.0
        self.max_d = 0.0
        self.count = 0
        self.rows: list[LeafRow] | None = [] if keep_strings else None

    def visit(self, a, l0, l1, codes, depths):
        prob = self.al2 * l0 + self.be2 * l1
        concl = conclude_array(a)
        for c in (B0, B1, UNDECIDED):
            self.p[c] += float(np.sum(prob[concl == c]))
        self.sum_l0 += float(np.sum(l0))
        self.sum_l1 += float(np.sum(l1))
        a2 = a * a
        d = np.minimum(a2, 1.0 - a2)
        if d.size:
            self.max_d = max(self.max_d, float(d.max()))
        self.count += a.size
        if self.rows is not None:
            names = ("B0", "B1", "UNDECIDED")
            for i in range(a.size):
                s = format(int(codes[i]), f"0{int(depths[i])}b") if depths[i] else ""
                self.rows.append(LeafRow(s, float(prob[i]), float(d[i]), names[concl[i]]))


def _walk(acc, phi, a, chi, l0, l1, codes, depth, remaining, terminate):
    if remaining == 0 or a.size == 0:
        acc.visit(a, l0, l1, codes, np.full(a.size, depth))
        return
    if a.size > CHUNK:
        for lo in range(0, a.size, CHUNK):
            sl = slice(lo, lo + CHUNK)
            _walk(acc, phi, a[sl], chi[sl], l0[sl], l1[sl], codes[sl], depth, remaining, terminate)
        return
    tab = step_tables(a, chi, phi)
    ca = tab.a_next.reshape(-1)
    cchi = tab.chi_next.reshape(-1)
    cl0 = (l0[:, None] * tab.lam0).reshape(-1)
    cl1 = (l1[:, None] * tab.lam1).reshape(-1)
    ccodes = (2 * codes[:, None] + np.array([0, 1])).reshape(-1)
    if terminate:
        computational = (a == 0.0) | (a == 1.0)
        click = (computational[:, None] & (tab.e_zero == 0.0)).reshape(-1)
        if np.any(click):
            # an ancilla click in the computational basis ends the run
            acc_idx = np.flatnonzero(click)
            acc.visit(ca[acc_idx], cl0[acc_idx], cl1[acc_idx], ccodes[acc_idx], np.full(acc_idx.size, depth + 1))
            keep = ~click
            ca, cchi, cl0, cl1, ccodes = ca[keep], cchi[keep], cl0[keep], cl1[keep], ccodes[keep]
    _walk(acc, phi, ca, cchi, cl0, cl1, ccodes, depth + 1, remaining - 1, terminate)


def _enumerate(al2, be2, basis0, phi, n, terminate=True, keep_strings=False) -> EnumerationResult:
    check_phi(phi)
    # a computational start with early termination has only n + 1 leaves
    chain = terminate and basis0.is_computational
    if n < 0 or (n > MAX_DEPTH and not chain):
        raise ValueError(f"enumeration depth must lie in [0, {MAX_DEPTH}], got {n}")
    acc = _Accumulator(al2, be2, keep_strings)
    one = np.ones(1)
    _walk(acc, phi, np.array([basis0.a]), np.array([basis0.chi]), one, one.copy(),
          np.zeros(1, dtype=np.int64), 0, n, terminate)
    rows = acc.rows
    if rows is not None and terminate:
        # terminated leaves were emitted before their surviving siblings' subtrees
        rows.sort(key=lambda r: r.string)
    return EnumerationResult(n, acc.p[B0], acc.p[B1], acc.p[UNDECIDED], acc.sum_l0, acc.sum_l1,
                             acc.max_d, acc.count, rows)


def enumerate_exact(
    state0: np.ndarray, basis0: BasisParams, phi: float, n: int, per_string: bool | None = None
) -> EnumerationResult:
    """Exact conclusion probabilities after n steps.

    Leaf probability is |alpha|^2 prod lam_b0 + |beta|^2 prod lam_b1 along the
    string. The per-string table is kept by default up to depth 14.
    """
    al2, be2 = born_weights(np.asarray(state0, dtype=complex), basis0)
    keep = n <= PER_STRING_DEFAULT_MAX if per_string is None else per_string
    return _enumerate(al2, be2, basis0, phi, n, terminate=True, keep_strings=keep)


def recursion_check(state0: np.ndarray, basis0: BasisParams, phi: float, n: int) -> float:
    """|P_n(root) - sum_k p_k P_{n-1}(child k)| for the probability of concluding B0."""
    if n < 2 or (n > MAX_DEPTH and not basis0.is_computational):
        raise ValueError(f"recursion depth must lie in [2, {MAX_DEPTH}]")
    state0 = np.asarray(state0, dtype=complex)
    whole = enumerate_exact(state0, basis0, phi, n, per_string=False).p_b0
    unrolled = 0.0
    for k, u in ((0, 0.0), (1, math.nextafter(1.0, 0.0))):
        try:
            rec, _ = _advance(state0, basis0, phi, u)
        except ValueError:
            continue  # measure-zero branch contributes nothing
        if rec.outcome != k:
            continue
        if basis0.is_computational and rec.anc_overlap0 == 0.0:
            child = float(rec.basis_after.a ** 2 > 0.5)
        else:
            child = enumerate_exact(rec.state_after, rec.basis_after, phi, n - 1, per_string=False).p_b0
        unrolled += rec.prob * child
    return abs(whole - unrolled)


def sum_identities(basis0: BasisParams, phi: float, n: int) -> tuple[float, float]:
    """|sum prod lam_b0 - 1| and |sum prod lam_b1 - 1| over all 2^n strings."""
    res = _enumerate(1.0, 0.0, basis0, phi, n, terminate=False)
    return abs(res.sum_lambda0 - 1.0), abs(res.sum_lambda1 - 1.0)


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    gap: float
    cos_term: float
    max_distance: float


def convergence_table(state0, basis0: BasisParams, phi: float, n_list) -> list[ConvergenceRow]:
    """Exact gap |p_b0 - |alpha|^2| next to cos^{2n}(phi) for each depth."""
    al2, _ = born_weights(np.asarray(state0, dtype=complex), basis0)
    rows = []
    for n in n_list:
        res = enumerate_exact(state0, basis0, phi, n, per_string=False)
        rows.append(ConvergenceRow(n, abs(res.p_b0 - al2), math.cos(phi) ** (2 * n), res.max_distance))
    return rows
