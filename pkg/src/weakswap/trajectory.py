"""Feedback-controlled sequence of destructive weak measurements.

Each step builds the operators for the current target basis, samples an
outcome by the Born rule, applies M_k to the state and moves the basis by
U_k. The cumulative operator product is tracked alongside its
upper-triangular diagnostics (x, eps) so the convergence of the basis to
{|0>, |1>} can be read off directly.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .construction import (
    COMPUTATIONAL,
    BasisParams,
    StepOperators,
    basis_vectors,
    build_step_operators,
    canonicalize_basis,
    check_phi,
)
from .linalg import I2, dag, herm_eig2, is_normalized, max_abs
from .rng import POST_STREAM, TRAJECTORY_STREAM, generator

TIE_WINDOW = 1e-9
MIN_BRANCH_PROB = 1e-15
DEFAULT_ETA = 1e-6
DEFAULT_N_MAX = 200
# below this basis distance b = sqrt(1 - a^2) is no longer resolved by a
DISTANCE_FLOOR = 1e-12


class ConsistencyError(RuntimeError):
    """Two independent routes to the same quantity disagree."""


class Conclusion(str, Enum):
    B0 = "B0"
    B1 = "B1"
    UNDECIDED = "UNDECIDED"


def conclude(a: float) -> Conclusion:
    """Decide the projective outcome from |<b0|0>|^2 = a^2."""
    ov = a * a
    if abs(ov - 0.5) <= TIE_WINDOW:
        return Conclusion.UNDECIDED
    return Conclusion.B0 if ov > 0.5 else Conclusion.B1


class RandomStream:
    """Per-trial random substreams derived from a 64-bit seed.

    Trajectory sampling and classical postprocessing draw from separate
    Philox counters, so the postprocessing draw does not depend on how
    many steps the trajectory took.
    """

    def __init__(self, seed: int, trial: int = 0):
        self.seed = int(seed)
        self.trial = int(trial)
        self._traj = generator(self.seed, self.trial, TRAJECTORY_STREAM)
        self._post = None

    def uniform(self) -> float:
        return float(self._traj.random())

    def uniforms(self, n: int) -> np.ndarray:
        return self._traj.random(n)

    def post_uniform(self) -> float:
        if self._post is None:
            self._post = generator(self.seed, self.trial, POST_STREAM)
        return float(self._post.random())


@dataclass(frozen=True)
class StepRecord:
    index: int
    outcome: int
    prob: float
    lam_b0: float
    lam_b1: float
    basis_after: BasisParams
    state_after: np.ndarray
    anc_overlap0: float


@dataclass
class Trajectory:
    phi: float
    state0: np.ndarray
    basis0: BasisParams
    steps: list[StepRecord] = field(default_factory=list)
    product: np.ndarray = field(default_factory=lambda: I2.copy())
    x: complex = 0j
    eps: complex = 1 + 0j
    prefactor: float = 1.0
    final_basis: BasisParams = COMPUTATIONAL
    conclusion: Conclusion = Conclusion.UNDECIDED
    total_prob: float = 1.0

    @property
    def n_steps(self) -> int:
        return len(self.steps)

    @property
    def outcomes(self) -> str:
        return "".join(str(s.outcome) for s in self.steps)

    def eq20_form(self) -> np.ndarray:
        """e^{-iN phi} * prefactor * [[1, x], [0, eps]]."""
        n = self.n_steps
        return cmath.exp(-1j * n * self.phi) * self.prefactor * np.array(
            [[1.0, self.x], [0.0, self.eps]], dtype=complex
        )

    def closed_form_prob(self) -> float:
        """|alpha|^2 prod lam_b0 + |beta|^2 prod lam_b1 over the realized string."""
        b0, b1 = basis_vectors(self.basis0)
        al2 = abs(np.vdot(b0, self.state0)) ** 2
        be2 = abs(np.vdot(b1, self.state0)) ** 2
        return al2 * math.prod(s.lam_b0 for s in self.steps) + be2 * math.prod(
            s.lam_b1 for s in self.steps
        )


def _advance(
    state: np.ndarray, basis: BasisParams, phi: float, u: float, index: int = 1
) -> tuple[StepRecord, StepOperators]:
    ops = build_step_operators(basis, phi)
    p0 = float(np.vdot(state, dag(ops.M0) @ ops.M0 @ state).real)
    k = 0 if u < p0 else 1
    m = ops.kraus(k)
    mpsi = m @ state
    pk = float(np.vdot(mpsi, mpsi).real)
    if pk < MIN_BRANCH_PROB:
        raise ValueError(f"measure-zero branch: outcome {k} has probability {pk:.3e}")
    b0, _ = basis_vectors(basis)
    rec = StepRecord(
        index=index,
        outcome=k,
        prob=pk,
        lam_b0=float(ops.lam[0, k]),
        lam_b1=float(ops.lam[1, k]),
        basis_after=canonicalize_basis(ops.unitary(k) @ b0),
        state_after=mpsi / math.sqrt(pk),
        anc_overlap0=ops.ancilla.overlap0(k),
    )
    return rec, ops


def step(state: np.ndarray, basis: BasisParams, phi: float, u: float) -> StepRecord:
    """One weak measurement with outcome 0 iff u < p0."""
    if not is_normalized(np.asarray(state, dtype=complex), 1e-10):
        raise ValueError("state is not normalized")
    check_phi(phi)
    return _advance(np.asarray(state, dtype=complex), basis, phi, u)[0]


def x_full_sum(ratios: list[complex], phi: float) -> complex:
    """The off-diagonal accumulator recomputed from all <e|1>/<e|0> ratios at once."""
    n = len(ratios)
    c, s = math.cos(phi), math.sin(phi)
    total = sum(
        r * cmath.exp(-1j * phi * (n - j)) * c ** (j - 1) for j, r in enumerate(ratios, start=1)
    )
    return -1j * cmath.exp(1j * n * phi) * s * total


def run_trajectory(
    state0: np.ndarray,
    basis0: BasisParams,
    phi: float,
    n_max: int = DEFAULT_N_MAX,
    eta: float = DEFAULT_ETA,
    rng: RandomStream | None = None,
    validate: str = "fast",
) -> Trajectory:
    """Run the feedback protocol until the basis is eta-close to {|0>, |1>} or n_max.

    Distances below DISTANCE_FLOOR always stop the run, whatever eta is.

    A trajectory that starts in the computational basis follows the
    boundary protocol instead: it runs until the first ancilla click
    (outcome with <e_k|0> = 0) or n_max, since its basis distance is
    already zero.

    ``validate`` is ``"full"`` (cross-check every step), ``"fast"``
    (every 8th step and the last) or ``"off"``.
    """
    state0 = np.asarray(state0, dtype=complex)
    if not is_normalized(state0, 1e-10):
        raise ValueError("state is not normalized")
    check_phi(phi)
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if not 0.0 < eta < 0.5:
        raise ValueError("eta must lie in (0, 1/2)")
    if validate not in ("full", "fast", "off"):
        raise ValueError(f"unknown validate mode {validate!r}")
    rng = rng if rng is not None else RandomStream(0)

    traj = Trajectory(phi=phi, state0=state0, basis0=basis0)
    c, s = math.cos(phi), math.sin(phi)
    decay = cmath.exp(1j * phi) * c

    b0_vec, b1_vec = basis_vectors(basis0)
    alpha = np.vdot(b0_vec, state0)
    beta = np.vdot(b1_vec, state0)
    lam_prod0 = lam_prod1 = 1.0
    ratios: list[complex] = []

    state, basis = state0, basis0
    for n in range(1, n_max + 1):
        rec, ops = _advance(state, basis, phi, rng.uniform(), index=n)
        k = rec.outcome
        e = ops.ancilla.vector(k)
        traj.product = ops.kraus(k) @ traj.product
        traj.prefactor *= rec.anc_overlap0
        traj.eps *= decay
        if rec.anc_overlap0 > 0.0:
            r = complex(np.conj(e[1])) / rec.anc_overlap0
            ratios.append(r)
            traj.x += cmath.exp(1j * n * phi) * (-1j * s * r) * c ** (n - 1)
        traj.total_prob *= rec.prob
        traj.steps.append(rec)

        u = ops.unitary(k)
        b0_vec, b1_vec = u @ b0_vec, u @ b1_vec
        lam_prod0 *= rec.lam_b0
        lam_prod1 *= rec.lam_b1

        clicked = basis.is_computational and rec.anc_overlap0 == 0.0
        state, basis = rec.state_after, rec.basis_after
        done = clicked if traj.basis0.is_computational else basis.distance < max(eta, DISTANCE_FLOOR)
        if validate == "full" or (validate == "fast" and (n % 8 == 0 or done or n == n_max)):
            _cross_check(traj, state, alpha, beta, lam_prod0, lam_prod1, b0_vec, b1_vec, ratios)
        if done:
            break

    traj.final_basis = basis
    traj.conclusion = conclude(basis.a)
    return traj


def _cross_check(traj, state, alpha, beta, l0, l1, b0_vec, b1_vec, ratios):
    closed = alpha * math.sqrt(l0) * b0_vec + beta * math.sqrt(l1) * b1_vec
    norm = np.linalg.norm(closed)
    if max_abs(closed / norm - state) > 1e-9:
        raise ConsistencyError(f"state closed form deviates at step {traj.n_steps}")
    if abs(traj.product[1, 0]) > 1e-12:
        raise ConsistencyError(f"cumulative product not upper triangular at step {traj.n_steps}")
    if ratios and len(ratios) == traj.n_steps:
        if abs(x_full_sum(ratios, traj.phi) - traj.x) > 1e-9 * max(1.0, abs(traj.x)):
            raise ConsistencyError(f"incremental x disagrees with the full sum at step {traj.n_steps}")
        if max_abs(traj.eq20_form() - traj.product) > 1e-9:
            raise ConsistencyError(f"product lost its upper-triangular form at step {traj.n_steps}")


def run_boundary_trajectory(
    state0: np.ndarray, phi: float, n_max: int = DEFAULT_N_MAX, rng: RandomStream | None = None
) -> Trajectory:
    """Computational-basis protocol: stop at the first outcome 1 (conclude B1)."""
    return run_trajectory(state0, COMPUTATIONAL, phi, n_max, DEFAULT_ETA, rng)


def overlap_from_diagnostics(x: complex, eps: complex) -> float:
    """|<v+|0>|^2 for the eigenvector of [[1+|x|^2, x eps*], [x* eps, |eps|^2]] nearest |0>."""
    xx = abs(x) ** 2
    ee = abs(eps) ** 2
    if xx == 0.0 or ee == 0.0:
        return 1.0
    s = 1.0 + xx - ee + math.sqrt((1.0 + xx + ee) ** 2 - 4.0 * ee)
    return s * s / (s * s + 4.0 * xx * ee)


def overlap_by_eigendecomposition(x: complex, eps: complex) -> float:
    h = np.array(
        [[1 + abs(x) ** 2, x * np.conj(eps)], [np.conj(x) * eps, abs(eps) ** 2]], dtype=complex
    )
    _, _, _, v_hi = herm_eig2(h)
    return float(abs(v_hi[0]) ** 2)


@dataclass(frozen=True)
class ConvergenceReport:
    rows: list[tuple[int, float]]
    final: float
    monotone: bool


def basis_convergence_report(t: Trajectory) -> ConvergenceReport:
    rows = [(0, t.basis0.distance)] + [(s.index, s.basis_after.distance) for s in t.steps]
    ds = [d for _, d in rows]
    monotone = all(b <= a + 1e-15 for a, b in zip(ds, ds[1:]))
    return ConvergenceReport(rows, ds[-1], monotone)
