"""Array versions of the per-step construction, for many bases at once.

The scalar path in :mod:`weakswap.construction` diagonalizes each POVM
element; here the eigenvalues on b0/b1 are read off as ||M_k b_j||^2,
which is exact once the ancilla basis aligns the POVM with {b0, b1}.
Kraus operators are upper triangular, so they are carried as their three
nonzero entries. Both routes are cross-checked in the tests.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .construction import EDGE_TOL


@dataclass
class StepTables:
    """Per-node step data; every array has shape (n, 2), indexed [node, k]."""

    e_zero: np.ndarray  # <e_k|0>, real
    e_one: np.ndarray  # <e_k|1>
    m00: np.ndarray
    m01: np.ndarray
    m11: np.ndarray
    lam0: np.ndarray  # eigenvalue of M_k^dag M_k on b0
    lam1: np.ndarray  # ... on b1
    a_next: np.ndarray
    chi_next: np.ndarray


def wrap_angles(x: np.ndarray) -> np.ndarray:
    y = np.mod(x + np.pi, 2.0 * np.pi) - np.pi
    return np.where(y >= np.pi, -np.pi, y)


def ancilla_arrays(a: np.ndarray, chi: np.ndarray, phi: float) -> tuple[np.ndarray, np.ndarray]:
    """<e_k|0> (real) and <e_k|1> (complex), shape (n, 2) each."""
    a2 = a * a
    s = 4.0 * a2 * (1.0 - a2)
    num = np.maximum(0.0, 1.0 - s)
    den = num + s * math.sin(phi) ** 2
    delta = np.minimum(1.0, np.sqrt(num / np.where(den > 0.0, den, 1.0)))
    w = np.exp(1j * (chi + phi - math.pi / 2))
    hi = np.sqrt((1.0 + delta) / 2.0)
    lo = np.sqrt((1.0 - delta) / 2.0)
    big = a >= np.sqrt(np.maximum(0.0, 1.0 - a2))
    zero = np.stack([np.where(big, hi, lo), np.where(big, lo, hi)], axis=-1)
    one = np.stack([np.where(big, lo, hi) * w, -np.where(big, hi, lo) * w], axis=-1)
    # vanishing |0> component: rephase so the |1> component is real positive
    one = np.where(zero == 0.0, np.abs(one), one)
    return zero, one.conj()


def snap_basis(v0: np.ndarray, v1: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(a, chi) of normalized b0 = (v0, v1), snapped at the edges like the scalar path."""
    a = np.minimum(1.0, np.abs(v0))
    chi = wrap_angles(np.angle(v1) - np.angle(v0))
    lo, hi = a < EDGE_TOL, (np.abs(v1) < EDGE_TOL) | (a == 1.0)
    a = np.where(lo, 0.0, np.where(hi, 1.0, a))
    return a, np.where(lo | hi, 0.0, chi)


def kraus_entries(a: np.ndarray, chi: np.ndarray, phi: float):
    """(e_zero, e_one, m00, m01, m11) for both outcomes, each of shape (n, 2)."""
    e_zero, e_one = ancilla_arrays(a, chi, phi)
    c, s = math.cos(phi), math.sin(phi)
    return e_zero, e_one, e_zero * complex(c, -s), -1j * s * e_one, e_zero * c


def evolve_basis(a, chi, m00, m01, m11):
    """POVM eigenvalues on b0/b1 and the evolved basis under the given Kraus entries.

    All arguments broadcast together; returns (lam0, lam1, a_next, chi_next).
    """
    b = np.sqrt(np.maximum(0.0, 1.0 - a * a))
    ph = np.exp(1j * chi)
    # M b0 and M b1, with b0 = (a, b ph), b1 = (b, -a ph)
    u0, u1 = m00 * a + m01 * (b * ph), m11 * (b * ph)
    w0, w1 = m00 * b - m01 * (a * ph), -m11 * (a * ph)
    lam0 = np.clip(u0.real**2 + u0.imag**2 + u1.real**2 + u1.imag**2, 0.0, 1.0)
    lam1 = np.clip(w0.real**2 + w0.imag**2 + w1.real**2 + w1.imag**2, 0.0, 1.0)

    # evolved b0 = M b0 / sqrt(lam0), or the complement of the evolved b1 when
    # that column is better conditioned (global phase is irrelevant here)
    use_b0 = lam0 >= lam1
    n0 = np.sqrt(np.where(use_b0, lam0, 1.0))
    n1 = np.sqrt(np.where(use_b0, 1.0, lam1))
    v0 = np.where(use_b0, u0 / n0, -np.conj(w1) / n1)
    v1 = np.where(use_b0, u1 / n0, np.conj(w0) / n1)
    a_next, chi_next = snap_basis(v0, v1)
    return lam0, lam1, a_next, chi_next


def step_tables(a: np.ndarray, chi: np.ndarray, phi: float) -> StepTables:
    a = np.asarray(a, dtype=float)
    chi = np.asarray(chi, dtype=float)
    e_zero, e_one, m00, m01, m11 = kraus_entries(a, chi, phi)
    lam0, lam1, a_next, chi_next = evolve_basis(a[:, None], chi[:, None], m00, m01, m11)
    return StepTables(e_zero, e_one, m00, m01, m11, lam0, lam1, a_next, chi_next)
