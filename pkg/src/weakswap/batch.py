"""Many independent trajectories advanced in lockstep.

Trial t draws its step uniforms from ``RandomStream(seed, t)``, exactly as
the scalar engine does, so a trial's outcome string does not depend on
which batch or worker it ran in.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .construction import BasisParams, basis_vectors, check_phi
from .kernel import evolve_basis, kraus_entries
from .rng import TrialUniforms
from .trajectory import DISTANCE_FLOOR, MIN_BRANCH_PROB, TIE_WINDOW

B0, B1, UNDECIDED = 0, 1, 2
CONCLUSION_NAMES = ("B0", "B1", "UNDECIDED")


@dataclass
class StepLog:
    """Per-step arrays of shape (n_max, trials); rows past a trial's end are unused."""

    outcome: np.ndarray
    prob: np.ndarray
    lam_b0: np.ndarray
    lam_b1: np.ndarray
    a: np.ndarray
    chi: np.ndarray
    eps_abs: np.ndarray


@dataclass
class BatchResult:
    trials: np.ndarray
    conclusion: np.ndarray
    steps: np.ndarray
    final_a: np.ndarray
    final_chi: np.ndarray
    eps_abs: np.ndarray
    min_anc_overlap: np.ndarray
    max_lower_left: np.ndarray
    log: StepLog | None = None

    @property
    def final_distance(self) -> np.ndarray:
        a2 = self.final_a ** 2
        return np.minimum(a2, 1.0 - a2)


def conclude_array(a: np.ndarray) -> np.ndarray:
    ov = a * a
    out = np.where(ov > 0.5, B0, B1)
    return np.where(np.abs(ov - 0.5) <= TIE_WINDOW, UNDECIDED, out)


def run_batch(
    state0: np.ndarray,
    basis0: BasisParams,
    phi: float,
    n_max: int,
    eta: float,
    seed: int,
    trials,
    log_steps: bool = False,
) -> BatchResult:
    check_phi(phi)
    trials = np.asarray(list(trials), dtype=np.int64)
    t = len(trials)
    uniforms = TrialUniforms(seed, trials)

    state0 = np.asarray(state0, dtype=complex)
    psi0 = np.full(t, state0[0])
    psi1 = np.full(t, state0[1])
    a = np.full(t, basis0.a)
    chi = np.full(t, basis0.chi)
    # cumulative product [[p00, p01], [p10, p11]]
    p00 = np.ones(t, dtype=complex)
    p01 = np.zeros(t, dtype=complex)
    p10 = np.zeros(t, dtype=complex)
    p11 = np.ones(t, dtype=complex)
    steps = np.zeros(t, dtype=np.int64)
    min_e0 = np.full(t, np.inf)
    pref = np.ones(t)
    active = np.arange(t)
    boundary = basis0.is_computational
    stop_below = max(eta, DISTANCE_FLOOR)
    log = None
    if log_steps:
        shape = (n_max, t)
        log = StepLog(*(np.full(shape, np.nan) for _ in range(7)))
        log.outcome = np.full(shape, -1, dtype=np.int8)

    for n in range(n_max):
        idx = active
        if idx.size == 0:
            break
        a_i, chi_i = a[idx], chi[idx]
        e_zero, _, m00_k, m01_k, m11_k = kraus_entries(a_i, chi_i, phi)
        x0, x1 = psi0[idx], psi1[idx]
        mp0 = m00_k[:, 0] * x0 + m01_k[:, 0] * x1
        mp1 = m11_k[:, 0] * x1
        p0 = mp0.real**2 + mp0.imag**2 + mp1.real**2 + mp1.imag**2
        k = (uniforms.at(n, idx) >= p0).astype(np.int64)
        rows = np.arange(idx.size)
        m00, m01, m11 = m00_k[rows, k], m01_k[rows, k], m11_k[rows, k]
        one = k == 1
        if np.any(one):
            mp0 = np.where(one, m00 * x0 + m01 * x1, mp0)
            mp1 = np.where(one, m11 * x1, mp1)
        pk = np.where(one, mp0.real**2 + mp0.imag**2 + mp1.real**2 + mp1.imag**2, p0)
        if np.any(pk < MIN_BRANCH_PROB):
            raise ValueError("measure-zero branch sampled")
        norm = np.sqrt(pk)
        psi0[idx] = mp0 / norm
        psi1[idx] = mp1 / norm
        lam0, lam1, a_next, chi_next = evolve_basis(a_i, chi_i, m00, m01, m11)

        q00, q01, q10, q11 = p00[idx], p01[idx], p10[idx], p11[idx]
        p00[idx] = m00 * q00 + m01 * q10
        p01[idx] = m00 * q01 + m01 * q11
        p10[idx] = m11 * q10
        p11[idx] = m11 * q11

        e0k = e_zero[rows, k]
        clicked = ((a_i == 0.0) | (a_i == 1.0)) & (e0k == 0.0)
        a[idx] = a_next
        chi[idx] = chi_next
        steps[idx] += 1
        min_e0[idx] = np.minimum(min_e0[idx], e0k)
        pref[idx] *= e0k
        if log is not None:
            log.outcome[n, idx] = k
            log.prob[n, idx] = pk
            log.lam_b0[n, idx] = lam0
            log.lam_b1[n, idx] = lam1
            log.a[n, idx] = a[idx]
            log.chi[n, idx] = chi[idx]
            log.eps_abs[n, idx] = _eps_abs(p11[idx], pref[idx], math.cos(phi) ** (n + 1))

        if boundary:
            done = clicked
        else:
            a2 = a[idx] ** 2
            done = np.minimum(a2, 1.0 - a2) < stop_below
        active = idx[~done]

    return BatchResult(
        trials=trials,
        conclusion=conclude_array(a),
        steps=steps,
        final_a=a,
        final_chi=chi,
        eps_abs=_eps_abs(p11, pref, math.cos(phi) ** steps.astype(float)),
        min_anc_overlap=min_e0,
        max_lower_left=np.abs(p10),
        log=log,
    )


def _eps_abs(p11, pref, nominal):
    """|eps| read back from the product; a clicked boundary run has no prefactor left."""
    safe = np.where(pref > 0.0, pref, 1.0)
    return np.where(pref > 0.0, np.abs(p11) / safe, nominal)


def born_weights(state0: np.ndarray, basis0: BasisParams) -> tuple[float, float]:
    """(|alpha|^2, |beta|^2) of a state in the target basis."""
    b0, b1 = basis_vectors(basis0)
    return float(abs(np.vdot(b0, state0)) ** 2), float(abs(np.vdot(b1, state0)) ** 2)
