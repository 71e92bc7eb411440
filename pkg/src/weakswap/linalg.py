"""Small complex linear algebra for one qubit and a qubit pair.

Kets are complex arrays of shape (2,), single-qubit operators (2, 2) and
two-qubit operators (4, 4) over |00>, |01>, |10>, |11> (system first,
ancilla second).
"""
from __future__ import annotations

import math

import numpy as np

KET0 = np.array([1.0, 0.0], dtype=complex)
KET1 = np.array([0.0, 1.0], dtype=complex)
I2 = np.eye(2, dtype=complex)
I4 = np.eye(4, dtype=complex)
SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)

HERMITIAN_TOL = 1e-10
DEGENERATE_TOL = 1e-13
PHASE_TOL = 1e-14


def dag(m: np.ndarray) -> np.ndarray:
    return m.conj().T


def ket(c0: complex, c1: complex) -> np.ndarray:
    return np.array([c0, c1], dtype=complex)


def projector(v: np.ndarray) -> np.ndarray:
    return np.outer(v, v.conj())


def max_abs(m: np.ndarray) -> float:
    return float(np.max(np.abs(m)))


def norm2(v: np.ndarray) -> float:
    """Euclidean norm of a 2-component ket."""
    return math.hypot(abs(v[0]), abs(v[1]))


def is_normalized(v: np.ndarray, tol: float = 1e-12) -> bool:
    return abs(float(np.vdot(v, v).real) - 1.0) <= tol


def canonical_phase(v: np.ndarray) -> np.ndarray:
    """Rephase a ket so its |0> component is real and non-negative.

    When that component is below PHASE_TOL in magnitude the |1> component
    is made real and non-negative instead. Idempotent.
    """
    ref = v[0] if abs(v[0]) >= PHASE_TOL else v[1]
    if abs(ref) == 0.0 or (ref.imag == 0.0 and ref.real > 0.0):
        return np.array(v, dtype=complex)
    out = v * (abs(ref) / ref)
    # kill the round-off imaginary part on the reference component
    idx = 0 if abs(v[0]) >= PHASE_TOL else 1
    out[idx] = abs(ref)
    return out


def herm_eig2(h: np.ndarray) -> tuple[float, float, np.ndarray, np.ndarray]:
    """Closed-form eigendecomposition of a 2x2 Hermitian matrix.

    Returns ``(lam_lo, lam_hi, v_lo, v_hi)`` with canonically phased
    eigenvectors. A degenerate spectrum returns the computational basis.
    """
    h = np.asarray(h, dtype=complex)
    if h.shape != (2, 2) or not np.all(np.isfinite(h)):
        raise ValueError("not hermitian: expected a finite 2x2 matrix")
    if max_abs(h - dag(h)) > HERMITIAN_TOL:
        raise ValueError("not hermitian")
    p = h[0, 0].real
    q = h[1, 1].real
    r = 0.5 * (h[0, 1] + np.conj(h[1, 0]))
    mean = 0.5 * (p + q)
    half_gap = float(np.hypot(0.5 * (p - q), abs(r)))
    lam_lo, lam_hi = mean - half_gap, mean + half_gap
    if 2.0 * half_gap < DEGENERATE_TOL:
        return lam_lo, lam_hi, KET0.copy(), KET1.copy()

    # (H - lam) v = 0 has two candidate null vectors; use the better-conditioned one
    # lam - p and lam - q formed from the half difference to avoid cancellation
    d = 0.5 * (p - q)

    def null_vector(sign: float) -> np.ndarray:
        c1 = np.array([r, sign * half_gap - d], dtype=complex)
        c2 = np.array([sign * half_gap + d, np.conj(r)], dtype=complex)
        n1, n2 = norm2(c1), norm2(c2)
        return canonical_phase(c1 / n1 if n1 >= n2 else c2 / n2)

    return lam_lo, lam_hi, null_vector(-1.0), null_vector(1.0)


def is_unitary(u: np.ndarray, tol: float) -> bool:
    u = np.asarray(u, dtype=complex)
    return max_abs(dag(u) @ u - np.eye(u.shape[0])) <= tol


def partial_trace_ancilla(w: np.ndarray) -> np.ndarray:
    """Trace out the second (ancilla) factor of a 4x4 operator."""
    return np.einsum("iaja->ij", np.asarray(w, dtype=complex).reshape(2, 2, 2, 2))


def swap4() -> np.ndarray:
    s = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            s[2 * j + i, 2 * i + j] = 1.0
    return s
