import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from weakswap.linalg import (
    I2,
    I4,
    KET0,
    KET1,
    canonical_phase,
    herm_eig2,
    is_unitary,
    partial_trace_ancilla,
    projector,
)


def test_herm_eig2_diagonal():
    c2 = math.cos(0.3) ** 2
    lo, hi, v_lo, v_hi = herm_eig2(np.diag([1.0, c2]).astype(complex))
    assert lo == pytest.approx(c2, abs=1e-15)
    assert hi == pytest.approx(1.0, abs=1e-15)
    assert np.allclose(v_hi, KET0, atol=1e-15)
    assert np.allclose(v_lo, KET1, atol=1e-15)


def test_herm_eig2_rank_one_projector():
    lo, hi, _, v_hi = herm_eig2(np.full((2, 2), 0.5, dtype=complex))
    assert abs(lo) < 1e-15 and hi == pytest.approx(1.0)
    assert np.allclose(v_hi, np.array([1, 1]) / math.sqrt(2), atol=1e-15)


def test_herm_eig2_degenerate_returns_computational_basis():
    lo, hi, v_lo, v_hi = herm_eig2(0.3 * I2)
    assert lo == hi == pytest.approx(0.3)
    assert np.array_equal(v_lo, KET0) and np.array_equal(v_hi, KET1)


def test_herm_eig2_rejects_non_hermitian():
    with pytest.raises(ValueError, match="not hermitian"):
        herm_eig2(np.array([[1, 1], [0, 1]], dtype=complex))


def test_eigenvectors_have_canonical_phase(rng):
    for _ in range(200):
        z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        _, _, v_lo, v_hi = herm_eig2(z + z.conj().T)
        for v in (v_lo, v_hi):
            ref = v[0] if abs(v[0]) >= 1e-14 else v[1]
            assert ref.imag == 0.0 and ref.real >= 0.0


def test_reconstruction_1000_random(rng):
    worst = 0.0
    for _ in range(1000):
        z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        h = z + z.conj().T
        lo, hi, v_lo, v_hi = herm_eig2(h)
        assert lo <= hi
        assert abs(np.vdot(v_lo, v_hi)) < 1e-12
        for lam, v in ((lo, v_lo), (hi, v_hi)):
            assert np.max(np.abs(h @ v - lam * v)) < 1e-10
        rebuilt = lo * projector(v_lo) + hi * projector(v_hi)
        worst = max(worst, np.max(np.abs(rebuilt - h)))
    assert worst <= 1e-10


complex_entry = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)


@given(complex_entry, complex_entry)
def test_canonical_phase_idempotent(c0, c1):
    v = np.array([c0, c1], dtype=complex)
    once = canonical_phase(v)
    assert np.array_equal(canonical_phase(once), once)


@settings(max_examples=200)
@given(st.floats(-5, 5), st.floats(-5, 5), complex_entry)
def test_herm_eig2_property(p, q, r):
    h = np.array([[p, r], [np.conj(r), q]], dtype=complex)
    lo, hi, v_lo, v_hi = herm_eig2(h)
    rebuilt = lo * projector(v_lo) + hi * projector(v_hi)
    assert np.max(np.abs(rebuilt - h)) <= 1e-10 * max(1.0, np.max(np.abs(h)))


def test_is_unitary_examples():
    phi = 0.4
    assert is_unitary(I2, 1e-12)
    assert is_unitary(np.diag([np.exp(-1j * phi), 1.0]), 1e-12)
    assert not is_unitary(np.diag([2.0, 1.0]), 1e-12)
    assert is_unitary(I4, 1e-12)


def test_partial_trace_examples(rng):
    assert np.allclose(partial_trace_ancilla(I4), 2 * I2)
    e00 = np.zeros((4, 4), dtype=complex)
    e00[0, 0] = 1
    assert np.allclose(partial_trace_ancilla(e00), projector(KET0))
    z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    rho_sys = z @ z.conj().T
    anc = np.array([[0.3, 0.1j], [-0.1j, 0.7]])
    assert np.allclose(partial_trace_ancilla(np.kron(rho_sys, anc)), rho_sys, atol=1e-14)


def test_partial_trace_preserves_trace(rng):
    for _ in range(100):
        w = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        assert abs(np.trace(partial_trace_ancilla(w)) - np.trace(w)) <= 1e-12
