"""Per-step measurement objects for the weak-swap device.

Given the current target basis {b0, b1} and the swap strength phi, this
module picks the ancilla projectors, builds the two Kraus operators, reads
off the POVM eigenvalues on b0/b1 and the polar-decomposition unitaries.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import (
    I4,
    KET0,
    SIGMA_X,
    canonical_phase,
    dag,
    herm_eig2,
    is_normalized,
    max_abs,
    partial_trace_ancilla,
    projector,
    swap4,
)

EDGE_TOL = 1e-14
LAMBDA_FLOOR = 1e-13
MATCH_TOL = 1e-8


def wrap_angle(x: float) -> float:
    """Wrap to [-pi, pi)."""
    y = (x + math.pi) % (2.0 * math.pi) - math.pi
    return -math.pi if y >= math.pi else y


def check_phi(phi: float) -> float:
    phi = float(phi)
    if not (0.0 < phi < math.pi / 2):
        raise ValueError(f"phi must lie in (0, pi/2), got {phi!r}")
    return phi


@dataclass(frozen=True)
class BasisParams:
    """Projective basis b0 = a|0> + b e^{i chi}|1>, b1 = b|0> - a e^{i chi}|1>."""

    a: float
    chi: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.chi)):
            raise ValueError("basis parameters must be finite")
        if not 0.0 <= self.a <= 1.0:
            raise ValueError(f"basis amplitude a must lie in [0, 1], got {self.a!r}")

    @property
    def b(self) -> float:
        return math.sqrt(max(0.0, 1.0 - self.a * self.a))

    @property
    def is_computational(self) -> bool:
        return self.a == 0.0 or self.a == 1.0

    @property
    def distance(self) -> float:
        """1 - max(|<b0|0>|^2, |<b1|0>|^2)."""
        a2 = self.a * self.a
        return min(a2, 1.0 - a2)


COMPUTATIONAL = BasisParams(1.0, 0.0)


def canonicalize_basis(b0: np.ndarray) -> BasisParams:
    """Recover (a, chi) from a normalized b0, ignoring its global phase.

    A vector whose |0> or |1> amplitude is below EDGE_TOL in magnitude snaps
    to the computational basis. Snapping on the small amplitude rather than
    on a near 1 keeps b0 recoverable to round-off everywhere else.
    """
    b0 = np.asarray(b0, dtype=complex)
    if not is_normalized(b0, 1e-10):
        raise ValueError("basis vector is not normalized")
    a = min(1.0, abs(b0[0]))
    if a < EDGE_TOL:
        return BasisParams(0.0, 0.0)
    if abs(b0[1]) < EDGE_TOL or a == 1.0:
        return BasisParams(1.0, 0.0)
    chi = wrap_angle(float(np.angle(b0[1]) - np.angle(b0[0])))
    return BasisParams(a, chi)


def basis_vectors(p: BasisParams) -> tuple[np.ndarray, np.ndarray]:
    ph = np.exp(1j * p.chi)
    b0 = np.array([p.a, p.b * ph], dtype=complex)
    b1 = np.array([p.b, -p.a * ph], dtype=complex)
    return b0, b1


@dataclass(frozen=True)
class AncillaBasis:
    e0: np.ndarray
    e1: np.ndarray
    delta: float
    theta: float

    def vector(self, k: int) -> np.ndarray:
        return self.e0 if k == 0 else self.e1

    def overlap0(self, k: int) -> float:
        """<e_k|0>, real and non-negative by construction."""
        return float(self.vector(k)[0].real)


def basis_delta(a: float, phi: float) -> float:
    s = 4.0 * a * a * (1.0 - a * a)
    num = max(0.0, 1.0 - s)
    # 1 - s cos^2 written without cancellation for small phi
    den = num + s * math.sin(phi) ** 2
    return min(1.0, math.sqrt(num / den)) if den > 0.0 else 0.0


def _rephase(e: np.ndarray) -> np.ndarray:
    # <e|0> is already real >= 0 except when it vanishes exactly
    return canonical_phase(e) if e[0] == 0 else e


def select_ancilla_basis(p: BasisParams, phi: float) -> AncillaBasis:
    """Ancilla projectors that make both POVM elements diagonal in {b0, b1}."""
    phi = check_phi(phi)
    delta = basis_delta(p.a, phi)
    theta = p.chi + phi - math.pi / 2
    hi = math.sqrt((1.0 + delta) / 2.0)
    lo = math.sqrt((1.0 - delta) / 2.0)
    w = complex(math.cos(theta), math.sin(theta))
    if p.a >= p.b:
        e0 = np.array([hi, lo * w], dtype=complex)
        e1 = np.array([lo, -hi * w], dtype=complex)
    else:
        e0 = np.array([lo, hi * w], dtype=complex)
        e1 = np.array([hi, -lo * w], dtype=complex)
    return AncillaBasis(_rephase(e0), _rephase(e1), delta, theta)


def kraus_from_ancilla(e: np.ndarray, phi: float) -> np.ndarray:
    """M = <e|0> cos(phi) I - i sin(phi) |0><e|."""
    e = np.asarray(e, dtype=complex)
    if not is_normalized(e, 1e-10):
        raise ValueError("ancilla vector is not normalized")
    c, s = math.cos(phi), math.sin(phi)
    e_bra = e.conj()
    m = np.zeros((2, 2), dtype=complex)
    m[0, 0] = e_bra[0] * c - 1j * s * e_bra[0]
    m[0, 1] = -1j * s * e_bra[1]
    m[1, 1] = e_bra[0] * c
    return m


def povm_eigenvalues(m: np.ndarray, p: BasisParams) -> tuple[float, float]:
    """Eigenvalues of M^dag M on b0 and b1, by diagonalization and overlap matching.

    The smaller eigenvalue is re-evaluated as ||M v||^2 on its eigenvector,
    which keeps its relative accuracy when it is many orders below 1.
    """
    lam_lo, lam_hi, v_lo, v_hi = herm_eig2(dag(m) @ m)
    if lam_hi - lam_lo < 1e-13:
        mean = 0.5 * (lam_lo + lam_hi)
        return mean, mean
    b0, _ = basis_vectors(p)
    ov_lo = abs(np.vdot(b0, v_lo)) ** 2
    ov_hi = abs(np.vdot(b0, v_hi)) ** 2
    if max(ov_lo, ov_hi) <= 1.0 - MATCH_TOL:
        raise ValueError(
            f"basis mismatch: POVM eigenvectors do not align with b0 "
            f"(overlaps {ov_lo:.3e}, {ov_hi:.3e})"
        )
    mv = m @ v_lo
    lam_lo = min(float(np.vdot(mv, mv).real), 1.0)
    lam_hi = min(max(lam_hi, 0.0), 1.0)
    return (lam_hi, lam_lo) if ov_hi > ov_lo else (lam_lo, lam_hi)


def _complement(v: np.ndarray) -> np.ndarray:
    return np.array([-np.conj(v[1]), np.conj(v[0])], dtype=complex)


def polar_unitary(m: np.ndarray, p: BasisParams, lam_b0: float, lam_b1: float) -> np.ndarray:
    """Unitary factor U of M = U sqrt(M^dag M), built column by column on {b0, b1}.

    The column of the larger eigenvalue is M b_j / sqrt(lam_j). The other
    column is the orthogonal complement of the first, phase matched to
    M b_j; this is the same unitary but stays exactly unitary when the
    smaller eigenvalue is tiny. In the computational basis a vanishing
    eigenvalue gives U = -i sigma_x.
    """
    if min(lam_b0, lam_b1) <= LAMBDA_FLOOR and p.is_computational:
        return -1j * SIGMA_X
    b = basis_vectors(p)
    lam = (lam_b0, lam_b1)
    big = 0 if lam_b0 >= lam_b1 else 1
    small = 1 - big
    if lam[big] <= LAMBDA_FLOOR:
        raise ValueError(f"both POVM eigenvalues vanish (a={p.a!r})")
    cols = [None, None]
    cols[big] = m @ b[big] / math.sqrt(lam[big])
    comp = _complement(cols[big])
    ov = np.vdot(comp, m @ b[small])
    cols[small] = comp * (ov / abs(ov)) if abs(ov) > 0.0 else comp
    return np.outer(cols[0], b[0].conj()) + np.outer(cols[1], b[1].conj())


@dataclass(frozen=True)
class StepOperators:
    M0: np.ndarray
    M1: np.ndarray
    U0: np.ndarray
    U1: np.ndarray
    lam: np.ndarray  # lam[j, k]: eigenvalue of M_k^dag M_k on b_j
    ancilla: AncillaBasis

    def kraus(self, k: int) -> np.ndarray:
        return self.M0 if k == 0 else self.M1

    def unitary(self, k: int) -> np.ndarray:
        return self.U0 if k == 0 else self.U1


def build_step_operators(p: BasisParams, phi: float) -> StepOperators:
    anc = select_ancilla_basis(p, phi)
    ms, us = [], []
    lam = np.zeros((2, 2))
    for k in (0, 1):
        m = kraus_from_ancilla(anc.vector(k), phi)
        l0, l1 = povm_eigenvalues(m, p)
        ms.append(m)
        us.append(polar_unitary(m, p, l0, l1))
        lam[0, k], lam[1, k] = l0, l1
    return StepOperators(ms[0], ms[1], us[0], us[1], lam, anc)


def closed_form_eigenvalues(a: float, phi: float) -> tuple[float, float]:
    """The published closed-form eigenvalue pair (larger, smaller).

    Only trusted as a cross-check at a = b; elsewhere the index assignment
    of the published formula is inconsistent with the computational limit.
    """
    s = 4.0 * a * a * (1.0 - a * a)
    root = math.sqrt(max(0.0, 1.0 - s))
    den = math.sqrt(max(0.0, 1.0 - s) + s * math.sin(phi) ** 2)
    c2, s2 = math.cos(phi) ** 2, math.sin(phi) ** 2
    return 0.5 * (1 + (root * c2 + s2) / den), 0.5 * (1 + (root * c2 - s2) / den)


def weak_swap(phi: float) -> np.ndarray:
    return math.cos(phi) * I4 - 1j * math.sin(phi) * swap4()


def _state_grid(n: int = 24) -> list[np.ndarray]:
    # deterministic spread over the Bloch sphere plus the poles
    states = [KET0.copy(), np.array([0.0, 1.0], dtype=complex)]
    golden = math.pi * (3.0 - math.sqrt(5.0))
    for i in range(n - 2):
        z = 1.0 - 2.0 * (i + 0.5) / (n - 2)
        th = math.acos(z)
        az = golden * i
        states.append(np.array([math.cos(th / 2), math.sin(th / 2) * np.exp(1j * az)]))
    return states


def dilation_residual(e_basis: AncillaBasis, phi: float) -> float:
    """Max deviation between the swap-dilation map and the Kraus form."""
    u = weak_swap(phi)
    anc0 = projector(KET0)
    worst = 0.0
    for psi in _state_grid():
        rho = projector(psi)
        full = u @ np.kron(rho, anc0) @ dag(u)
        for k in (0, 1):
            e = e_basis.vector(k)
            proj = np.kron(np.eye(2), projector(e))
            via_dilation = partial_trace_ancilla(proj @ full @ proj)
            m = kraus_from_ancilla(e, phi)
            worst = max(worst, max_abs(via_dilation - m @ rho @ dag(m)))
    return worst
