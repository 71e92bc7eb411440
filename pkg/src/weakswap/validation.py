"""Invariant battery over a fixed grid plus seeded random inputs."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .construction import (
    COMPUTATIONAL,
    BasisParams,
    basis_vectors,
    build_step_operators,
    closed_form_eigenvalues,
    dilation_residual,
    select_ancilla_basis,
)
from .linalg import I2, dag, herm_eig2, max_abs, projector
from .oracle import enumerate_exact, recursion_check, sum_identities
from .povm import CommutingPOVM, exact_povm_probs, mixed_probs
from .trajectory import (
    RandomStream,
    overlap_by_eigendecomposition,
    overlap_from_diagnostics,
    run_trajectory,
)


@dataclass(frozen=True)
class Check:
    name: str
    deviation: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(self.deviation <= self.tol)

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name:<34s} max_dev={self.deviation:.3e}  tol={self.tol:.0e}"


GRID_A = (0.0, 0.1, 0.3, math.sqrt(0.5), 0.8, 0.95, 1.0)
GRID_CHI = (0.0, 0.7, -2.0)
GRID_PHI = (0.05, 0.3, 0.7, 1.2, 1.5)


def parameter_grid(seed: int = 42, n_random: int = 200):
    for a in GRID_A:
        for chi in GRID_CHI:
            for phi in GRID_PHI:
                yield BasisParams(a, 0.0 if a in (0.0, 1.0) else chi), phi
    rng = np.random.default_rng(seed)
    for _ in range(n_random):
        yield BasisParams(float(rng.uniform()), float(rng.uniform(-math.pi, math.pi))), float(
            rng.uniform(0.02, 1.55)
        )


def construction_checks(seed: int = 42) -> list[Check]:
    worst = dict(completeness=0.0, commutation=0.0, columns=0.0, polar=0.0, unitarity=0.0, dilation=0.0)
    for i, (p, phi) in enumerate(parameter_grid(seed)):
        ops = build_step_operators(p, phi)
        b0, _ = basis_vectors(p)
        pb0 = projector(b0)
        g0, g1 = dag(ops.M0) @ ops.M0, dag(ops.M1) @ ops.M1
        worst["completeness"] = max(worst["completeness"], max_abs(g0 + g1 - I2))
        worst["commutation"] = max(worst["commutation"], max_abs(g0 @ pb0 - pb0 @ g0), max_abs(g1 @ pb0 - pb0 @ g1))
        worst["columns"] = max(worst["columns"], float(np.max(np.abs(ops.lam.sum(axis=1) - 1.0))))
        for k, g in ((0, g0), (1, g1)):
            lo, hi, vlo, vhi = herm_eig2(g)
            root = math.sqrt(max(lo, 0.0)) * projector(vlo) + math.sqrt(max(hi, 0.0)) * projector(vhi)
            worst["polar"] = max(worst["polar"], max_abs(ops.unitary(k) @ root - ops.kraus(k)))
            u = ops.unitary(k)
            worst["unitarity"] = max(worst["unitarity"], max_abs(dag(u) @ u - I2))
        if i % 4 == 0:
            worst["dilation"] = max(worst["dilation"], dilation_residual(ops.ancilla, phi))
    return [
        Check("completeness", worst["completeness"], 1e-11),
        Check("eigenbasis commutation", worst["commutation"], 1e-10),
        Check("lambda column sums", worst["columns"], 1e-11),
        Check("polar reconstruction", worst["polar"], 1e-10),
        Check("unitarity of U_k", worst["unitarity"], 1e-10),
        Check("dilation equivalence", worst["dilation"], 1e-11),
    ]


def boundary_checks() -> list[Check]:
    dev_table = 0.0
    for phi in GRID_PHI:
        ops = build_step_operators(COMPUTATIONAL, phi)
        want = np.array([[1.0, 0.0], [math.cos(phi) ** 2, math.sin(phi) ** 2]])
        dev_table = max(dev_table, max_abs(ops.lam - want))
    dev_eq9 = 0.0
    p = BasisParams(math.sqrt(0.5), 0.0)
    for phi in GRID_PHI:
        ops = build_step_operators(p, phi)
        want = sorted(closed_form_eigenvalues(p.a, phi))
        for k in (0, 1):
            dev_eq9 = max(dev_eq9, max_abs(np.sort(ops.lam[:, k]) - np.array(want)))
    pos = 1.0
    for p, phi in parameter_grid():
        if not p.is_computational:
            anc = select_ancilla_basis(p, phi)
            pos = min(pos, anc.overlap0(0), anc.overlap0(1))
    return [
        Check("computational lambda table", dev_table, 1e-12),
        Check("closed-form eigenvalues at a=b", dev_eq9, 1e-10),
        Check("ancilla overlap positivity", 0.0 if pos > 0.0 else 1.0, 0.0),
    ]


def trajectory_checks(seed: int = 42) -> list[Check]:
    eps_dev = prob_dev = tri_dev = 0.0
    cases = [(0.8, 0.0, 0.5), (math.sqrt(0.5), 1.0, 0.3), (0.3, -0.4, 0.9), (1.0, 0.0, 0.4)]
    for ci, (a, chi, phi) in enumerate(cases):
        p = BasisParams(a, chi)
        b0, b1 = basis_vectors(p)
        state = math.sqrt(0.55) * b0 + np.exp(0.4j) * math.sqrt(0.45) * b1
        for trial in range(10):
            t = run_trajectory(state, p, phi, 60, 1e-9, RandomStream(seed, 100 * ci + trial), validate="full")
            want = math.cos(phi) ** t.n_steps
            eps_dev = max(eps_dev, abs(abs(t.eps) - want) / want)
            psi_prod = t.product @ state
            prob_dev = max(prob_dev, abs(t.total_prob - float(np.vdot(psi_prod, psi_prod).real)),
                           abs(t.total_prob - t.closed_form_prob()))
            tri_dev = max(tri_dev, abs(t.product[1, 0]))
    return [
        Check("eps magnitude law (relative)", eps_dev, 1e-10),
        Check("string probability", prob_dev, 1e-9),
        Check("upper-triangular product", tri_dev, 1e-12),
    ]


def oracle_checks(seed: int = 42) -> list[Check]:
    rng = np.random.default_rng(seed)
    sum_dev = rec_dev = cons_dev = 0.0
    for _ in range(3):
        p = BasisParams(float(rng.uniform(0.05, 0.95)), float(rng.uniform(-3, 3)))
        phi = float(rng.uniform(0.2, 1.0))
        sum_dev = max(sum_dev, *sum_identities(p, phi, 10))
        b0, b1 = basis_vectors(p)
        al = float(rng.uniform())
        state = math.sqrt(al) * b0 + math.sqrt(1 - al) * b1
        rec_dev = max(rec_dev, recursion_check(state, p, phi, 8))
        r = enumerate_exact(state, p, phi, 10, per_string=False)
        cons_dev = max(cons_dev, abs(r.p_b0 + r.p_b1 + r.p_undecided - 1.0))
    return [
        Check("lambda-product sum identities", sum_dev, 1e-9),
        Check("probability recursion", rec_dev, 1e-10),
        Check("leaf probability conservation", cons_dev, 1e-10),
    ]


def overlap_checks(seed: int = 42) -> list[Check]:
    rng = np.random.default_rng(seed)
    dev = 0.0
    for _ in range(2000):
        x = complex(*rng.normal(size=2)) * 10 ** rng.uniform(-2, 2)
        eps = rng.uniform(0, 0.99) * np.exp(1j * rng.uniform(0, 2 * math.pi))
        dev = max(dev, abs(overlap_from_diagnostics(x, eps) - overlap_by_eigendecomposition(x, eps)))
    limits = abs(overlap_from_diagnostics(0, 0.5) - 1.0) + abs(overlap_from_diagnostics(1.3 + 0.2j, 0) - 1.0)
    return [Check("overlap formula vs eigenvector", dev, 1e-9), Check("overlap formula limits", limits, 0.0)]


def povm_checks(seed: int = 42) -> list[Check]:
    rng = np.random.default_rng(seed)
    dev = 0.0
    for _ in range(200):
        m = int(rng.integers(2, 6))
        w = rng.dirichlet(np.ones(m), size=2).T
        p = CommutingPOVM(BasisParams(float(rng.uniform()), float(rng.uniform(-3, 3))),
                          tuple((float(r[0]), float(r[1])) for r in w))
        b0, b1 = basis_vectors(p.basis)
        al = float(rng.uniform())
        state = math.sqrt(al) * b0 + np.exp(1j * rng.uniform(0, 6)) * math.sqrt(1 - al) * b1
        dev = max(dev, max_abs(mixed_probs(p, al, 1 - al) - exact_povm_probs(state, p)))
    return [Check("POVM total probability", dev, 1e-12)]


def run_validation(seed: int = 42) -> list[Check]:
    checks = []
    for fn in (construction_checks, boundary_checks, trajectory_checks, oracle_checks, overlap_checks, povm_checks):
        checks.extend(fn(seed) if fn is not boundary_checks else fn())
    return checks
