import math

import numpy as np
import pytest

from conftest import state_in_basis
from weakswap.batch import B0, B1, UNDECIDED, born_weights, conclude_array, run_batch
from weakswap.construction import COMPUTATIONAL, BasisParams
from weakswap.rng import POST_STREAM, TrialUniforms, first_uniform, generator, philox_block, to_unit
from weakswap.trajectory import RandomStream, run_trajectory


@pytest.mark.parametrize("seed", [0, 42, 2**63 + 12345, 2**64 - 1])
def test_philox_block_bit_exact(seed):
    trials = np.array([0, 1, 7, 99999, 2**40])
    for stream in (0, 1):
        for block in (1, 2, 5):
            got = philox_block(seed, stream, trials, block)
            for row, t in zip(got, trials):
                bg = np.random.Philox(key=seed, counter=[0, 0, stream, int(t)])
                want = bg.random_raw(4 * block)[-4:]
                assert np.array_equal(row, want.astype(np.uint64))


def test_uniforms_match_generator():
    trials = np.arange(6)
    tu = TrialUniforms(5, trials)
    rows = np.array([tu.at(step, np.arange(6)) for step in range(11)])
    for t in trials:
        assert np.array_equal(rows[:, t], generator(5, int(t), 0).random(11))


def test_first_uniform_is_post_stream():
    got = first_uniform(17, np.arange(4), POST_STREAM)
    want = [RandomStream(17, t).post_uniform() for t in range(4)]
    assert np.array_equal(got, want)


def test_to_unit_range():
    raw = np.array([0, 2**64 - 1], dtype=np.uint64)
    u = to_unit(raw)
    assert u[0] == 0.0 and u[1] < 1.0


def test_conclude_array():
    a = np.sqrt(np.array([0.9, 0.1, 0.5, 0.5 + 5e-10]))
    assert list(conclude_array(a)) == [B0, B1, UNDECIDED, UNDECIDED]


@pytest.mark.parametrize(
    "basis,alpha_sq,phi,n_max,eta",
    [
        (BasisParams(0.8, 0.3), 0.55, 0.5, 80, 1e-6),
        (BasisParams(0.6, -1.2), 0.25, 0.9, 60, 1e-9),
        (COMPUTATIONAL, 0.7, 0.3, 40, 1e-6),
        (BasisParams(0.0, 0.0), 0.4, 0.6, 30, 1e-6),
    ],
)
def test_batch_agrees_with_scalar(basis, alpha_sq, phi, n_max, eta):
    psi = state_in_basis(basis, alpha_sq, 0.7)
    res = run_batch(psi, basis, phi, n_max, eta, 31, range(120), log_steps=True)
    for t in range(120):
        tr = run_trajectory(psi, basis, phi, n_max, eta, RandomStream(31, t))
        n = tr.n_steps
        assert res.steps[t] == n
        assert "".join(map(str, res.log.outcome[:n, t])) == tr.outcomes
        assert np.allclose(res.log.prob[:n, t], [s.prob for s in tr.steps], atol=1e-12, rtol=0)
        assert np.allclose(res.log.lam_b0[:n, t], [s.lam_b0 for s in tr.steps], atol=1e-12, rtol=0)
        assert ("B0", "B1", "UNDECIDED")[res.conclusion[t]] == tr.conclusion.value
        assert res.final_a[t] == pytest.approx(tr.final_basis.a, abs=1e-10)
        assert res.eps_abs[t] == pytest.approx(abs(tr.eps), rel=1e-10)


def test_batch_subset_independent_of_grouping():
    basis = BasisParams(0.7, 0.1)
    psi = state_in_basis(basis, 0.5)
    whole = run_batch(psi, basis, 0.4, 100, 1e-6, 8, range(50))
    part = run_batch(psi, basis, 0.4, 100, 1e-6, 8, range(20, 35))
    assert np.array_equal(whole.conclusion[20:35], part.conclusion)
    assert np.array_equal(whole.steps[20:35], part.steps)


def test_batch_structural_outputs():
    basis = BasisParams(0.8, 0.0)
    res = run_batch(state_in_basis(basis, 0.55), basis, 0.5, 40, 1e-300, 1, range(200))
    assert np.all(res.steps == 40)
    assert np.max(np.abs(res.eps_abs / math.cos(0.5) ** 40 - 1)) <= 1e-10
    assert np.all(res.min_anc_overlap > 0)
    assert np.max(res.max_lower_left) == 0.0


def test_born_weights():
    basis = BasisParams(0.6, 0.4)
    al2, be2 = born_weights(state_in_basis(basis, 0.3, 1.0), basis)
    assert al2 == pytest.approx(0.3, abs=1e-15) and be2 == pytest.approx(0.7, abs=1e-15)
