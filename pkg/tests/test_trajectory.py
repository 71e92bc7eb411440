import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import state_in_basis
from weakswap.construction import COMPUTATIONAL, BasisParams, basis_vectors, build_step_operators
from weakswap.linalg import KET0, KET1, dag
from weakswap.trajectory import (
    DISTANCE_FLOOR,
    Conclusion,
    RandomStream,
    basis_convergence_report,
    conclude,
    overlap_by_eigendecomposition,
    overlap_from_diagnostics,
    run_boundary_trajectory,
    run_trajectory,
    step,
    x_full_sum,
)


def test_conclusion_rule():
    assert conclude(0.8) is Conclusion.B0
    assert conclude(0.1) is Conclusion.B1
    assert conclude(math.sqrt(0.5)) is Conclusion.UNDECIDED
    assert conclude(math.sqrt(0.5 + 2e-9)) is Conclusion.B0


def test_step_click_flips_basis():
    phi = 0.4
    rec = step(KET1, COMPUTATIONAL, phi, math.cos(phi) ** 2 + 1e-3)
    assert rec.outcome == 1
    assert abs(abs(rec.state_after[0]) - 1) < 1e-15
    assert rec.basis_after == BasisParams(0.0, 0.0)
    assert rec.prob == pytest.approx(math.sin(phi) ** 2, abs=1e-15)


def test_step_eigenstate_stays_on_branch():
    p = BasisParams(0.8, 0.3)
    b0, _ = basis_vectors(p)
    ops = build_step_operators(p, 0.6)
    for u in (0.0, 0.999999):
        rec = step(b0, p, 0.6, u)
        assert rec.prob == pytest.approx(ops.lam[0, rec.outcome], abs=1e-12)
        moved = ops.unitary(rec.outcome) @ b0
        assert abs(abs(np.vdot(moved, rec.state_after)) - 1) < 1e-12
        assert abs(abs(np.vdot(basis_vectors(rec.basis_after)[0], rec.state_after)) - 1) < 1e-12


def test_step_probability_two_ways():
    p = BasisParams(0.8, 0.0)
    psi = np.array([0.6, 0.8], dtype=complex)
    ops = build_step_operators(p, 0.2)
    for u in (0.1, 0.95):
        rec = step(psi, p, 0.2, u)
        m = ops.kraus(rec.outcome)
        assert rec.prob == pytest.approx(float(np.vdot(psi, dag(m) @ m @ psi).real), abs=1e-12)
        b0, b1 = basis_vectors(p)
        al2, be2 = abs(np.vdot(b0, psi)) ** 2, abs(np.vdot(b1, psi)) ** 2
        assert rec.prob == pytest.approx(al2 * rec.lam_b0 + be2 * rec.lam_b1, abs=1e-10)


def test_step_rejects_measure_zero():
    # |0> in the computational basis cannot click; u = 1 forces that branch
    assert step(KET0, COMPUTATIONAL, 0.4, 0.999999).outcome == 0
    with pytest.raises(ValueError, match="measure-zero"):
        step(KET0, COMPUTATIONAL, 0.4, 1.0)


def test_step_rejects_unnormalized():
    with pytest.raises(ValueError):
        step(np.array([1.0, 1.0]), COMPUTATIONAL, 0.4, 0.5)


def test_boundary_ket0_always_b0():
    for seed in range(20):
        t = run_boundary_trajectory(KET0, 0.5, 30, RandomStream(seed))
        assert t.conclusion is Conclusion.B0 and t.n_steps == 30
        assert t.total_prob == pytest.approx(1.0, abs=1e-14)


def test_boundary_b1_iff_click():
    psi = np.array([math.sqrt(0.6), math.sqrt(0.4)], dtype=complex)
    for trial in range(200):
        t = run_boundary_trajectory(psi, 0.5, 25, RandomStream(3, trial))
        clicked = "1" in t.outcomes
        assert (t.conclusion is Conclusion.B1) == clicked
        if clicked:
            assert t.outcomes.endswith("1") and t.outcomes.count("1") == 1
        else:
            assert t.n_steps == 25


def test_boundary_survival_probability():
    # the all-zero string has probability |alpha|^2 + |beta|^2 cos^{2N}
    phi, n = 0.3, 12
    psi = np.array([math.sqrt(0.7), math.sqrt(0.3)], dtype=complex)
    for trial in range(50):
        t = run_boundary_trajectory(psi, phi, n, RandomStream(1, trial))
        if t.conclusion is Conclusion.B0:
            assert t.total_prob == pytest.approx(0.7 + 0.3 * math.cos(phi) ** (2 * n), abs=1e-12)
            return
    pytest.fail("no surviving trajectory")


def test_eps_law_independent_of_outcomes():
    phi = 0.5
    psi = state_in_basis(BasisParams(0.8, 0.0), 0.55)
    strings = set()
    for trial in range(30):
        t = run_trajectory(psi, BasisParams(0.8, 0.0), phi, 40, 1e-300, RandomStream(9, trial))
        assert t.n_steps == 40
        assert abs(abs(t.eps) / math.cos(phi) ** 40 - 1) <= 1e-10
        strings.add(t.outcomes)
    assert len(strings) > 1


def test_full_validation_mode_runs_clean():
    # validate="full" asserts the closed-form state, the triangular product and x at every step
    g = np.random.default_rng(4)
    for trial in range(40):
        p = BasisParams(float(g.uniform(0.05, 0.95)), float(g.uniform(-3, 3)))
        psi = state_in_basis(p, float(g.uniform()), float(g.uniform(0, 6)))
        t = run_trajectory(psi, p, float(g.uniform(0.2, 1.2)), 60, 1e-8, RandomStream(2, trial), "full")
        assert abs(t.product[1, 0]) <= 1e-12
        assert np.max(np.abs(t.eq20_form() - t.product)) <= 1e-9


def test_total_prob_three_ways():
    p = BasisParams(0.65, 1.1)
    psi = state_in_basis(p, 0.3, 0.8)
    for trial in range(30):
        t = run_trajectory(psi, p, 0.45, 50, 1e-7, RandomStream(5, trial))
        amp = t.product @ psi
        assert t.total_prob == pytest.approx(float(np.vdot(amp, amp).real), abs=1e-10)
        assert t.total_prob == pytest.approx(t.closed_form_prob(), abs=1e-9)


def test_reproducible_outcome_strings():
    p = BasisParams(0.7, 0.2)
    psi = state_in_basis(p, 0.4)
    runs = [run_trajectory(psi, p, 0.5, 80, 1e-6, RandomStream(77, 4)).outcomes for _ in range(2)]
    assert runs[0] == runs[1]
    other = run_trajectory(psi, p, 0.5, 80, 1e-6, RandomStream(77, 5)).outcomes
    assert other != runs[0]


def test_ancilla_overlap_positive_off_boundary():
    p = BasisParams(0.55, -0.4)
    psi = state_in_basis(p, 0.5)
    for trial in range(50):
        t = run_trajectory(psi, p, 0.7, 100, 1e-9, RandomStream(8, trial))
        assert all(s.anc_overlap0 > 0 for s in t.steps)


def test_stops_within_eta():
    p = BasisParams(0.8, 0.0)
    t = run_trajectory(state_in_basis(p, 0.55), p, 0.5, 200, 1e-6, RandomStream(1))
    assert t.final_basis.distance < 1e-6
    assert t.n_steps < 200


def test_argument_validation():
    with pytest.raises(ValueError):
        run_trajectory(KET0, COMPUTATIONAL, 0.5, 0)
    with pytest.raises(ValueError):
        run_trajectory(KET0, COMPUTATIONAL, 0.5, 10, 0.5)
    with pytest.raises(ValueError):
        run_trajectory(KET0, COMPUTATIONAL, 1.7, 10)


def test_x_full_sum_matches_incremental():
    g = np.random.default_rng(0)
    ratios = list(g.normal(size=15) + 1j * g.normal(size=15))
    phi = 0.7
    c, s = math.cos(phi), math.sin(phi)
    x = 0j
    for n, r in enumerate(ratios, start=1):
        x += np.exp(1j * n * phi) * (-1j * s * r) * c ** (n - 1)
        assert abs(x_full_sum(ratios[:n], phi) - x) <= 1e-12 * max(1, abs(x))


# overlap formula


def test_overlap_limits_exact():
    assert overlap_from_diagnostics(0j, 0.5 + 0.2j) == 1.0
    assert overlap_from_diagnostics(3 - 1j, 0j) == 1.0


@settings(max_examples=300)
@given(
    st.floats(0, 20), st.floats(0, 2 * math.pi), st.floats(0, 0.999), st.floats(0, 2 * math.pi)
)
def test_overlap_matches_eigendecomposition(rx, ax, re, ae):
    x, eps = rx * np.exp(1j * ax), re * np.exp(1j * ae)
    assert abs(overlap_from_diagnostics(x, eps) - overlap_by_eigendecomposition(x, eps)) <= 1e-9


def test_overlap_matches_final_basis():
    p = BasisParams(0.75, 0.9)
    for trial in range(10):
        t = run_trajectory(state_in_basis(p, 0.5), p, 0.5, 40, 1e-300, RandomStream(6, trial))
        a2 = t.final_basis.a ** 2
        assert overlap_from_diagnostics(t.x, t.eps) == pytest.approx(max(a2, 1 - a2), abs=1e-9)


# convergence report


def test_report_computational_all_zero():
    t = run_boundary_trajectory(np.array([0.6, 0.8], dtype=complex), 0.3, 20, RandomStream(2))
    rep = basis_convergence_report(t)
    assert all(d == 0.0 for _, d in rep.rows)


def test_report_balanced_start_bound():
    phi = 0.5
    p = BasisParams(1 / math.sqrt(2), 0.0)
    for seed in (1, 2, 3):
        t = run_trajectory(state_in_basis(p, 0.5), p, phi, 60, 1e-300, RandomStream(seed))
        rep = basis_convergence_report(t)
        assert len(rep.rows) == 61
        assert rep.final <= 10 * math.cos(phi) ** 120
        assert all(d > 0 for _, d in rep.rows)
        assert rep.monotone


@pytest.mark.parametrize("phi", [0.5, 1.2, 1.565])
def test_distance_floor_stops_long_runs(phi):
    p = BasisParams(0.8, 0.3)
    psi = state_in_basis(p, 0.55)
    for trial in range(10):
        t = run_trajectory(psi, p, phi, 400, 1e-300, RandomStream(1, trial), "full")
        assert t.n_steps < 400
        assert t.final_basis.distance < DISTANCE_FLOOR
