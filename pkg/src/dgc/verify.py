"""Self-verification suite: numerical invariants checked against the dense
oracle on seeded random graphs.

Covers the worst-case Euler error bound, the per-step truncation bound,
measured convergence orders of both integrators, the sqrt-degree
equilibrium fixed point, the heat-kernel semigroup law, and analytic
gradients vs. central finite differences. ``dgc verify`` runs this and
exits nonzero on any violation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .classifier import SoftmaxModel, loss_and_grad
from .diffusion import euler_propagate, rk4_propagate
from .graphcore import SparseGraph, build_graph, laplacian, normalize
from .oracle import (
    eigendecompose,
    euler_error_bound,
    euler_truncation_bound,
    exact_heat_kernel,
)

BOUND_T_GRID = (0.5, 1.0, 2.0, 4.0)
BOUND_K_GRID = (1, 2, 4, 8, 16, 32, 64)
SLOPE_K_GRID = (2, 4, 8, 16, 32, 64, 128, 256, 512)
ERROR_FLOOR = 1e-12

# The error bounds hold for the discretization error in exact arithmetic;
# measuring them in floats leaves ~K*eps*||x|| of rounding residue, which
# matters only when the bound itself is 0 (edgeless graphs, where L = 0 and
# one fused step still rounds). Nine orders below the smallest nonzero
# bound in the suite.
ROUNDOFF_ATOL = 1e-12


@dataclass
class VerificationReport:
    seed: int
    bound_checks: int = 0
    bound_violations: int = 0
    truncation_checks: int = 0
    truncation_violations: int = 0
    euler_slope: float = float("nan")
    rk4_slope: float = float("nan")
    equilibrium_max_rel_err: float = float("nan")
    semigroup_max_err: float = float("nan")
    gradient_max_rel_err: float = float("nan")
    failures: list[str] = field(default_factory=list)

    @property
    def all_pass(self) -> bool:
        return not self.failures

    def to_csv(self) -> str:
        cols = (
            "seed,bound_checks,bound_violations,truncation_checks,"
            "truncation_violations,euler_slope,rk4_slope,"
            "equilibrium_max_rel_err,semigroup_max_err,gradient_max_rel_err,all_pass"
        )
        row = (
            f"{self.seed},{self.bound_checks},{self.bound_violations},"
            f"{self.truncation_checks},{self.truncation_violations},"
            f"{self.euler_slope:.6f},{self.rk4_slope:.6f},"
            f"{self.equilibrium_max_rel_err:.3e},{self.semigroup_max_err:.3e},"
            f"{self.gradient_max_rel_err:.3e},{int(self.all_pass)}"
        )
        return cols + "\n" + row + "\n"


def random_er_graph(rng: np.random.Generator, n: int, p: float = 0.3) -> SparseGraph:
    """Erdos-Renyi G(n, p) from the given generator."""
    draws = rng.random((n, n))
    src, dst = np.nonzero(np.triu(draws < p, k=1))
    return build_graph([(int(a), int(b), 1.0) for a, b in zip(src, dst)], n)


def _unit_features(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    x = rng.standard_normal((n, d))
    return x / np.linalg.norm(x)


def check_error_bound(report: VerificationReport, rng: np.random.Generator,
                      graphs: int = 100) -> None:
    """Worst-case-bound compliance on `graphs` seeded random instances."""
    for _ in range(graphs):
        n = int(rng.integers(4, 33))
        g = random_er_graph(rng, n)
        s = normalize(g, "aug")
        lap = laplacian(s)
        eig = eigendecompose(lap.to_dense())
        norm_l = float(eig.eigenvalues[-1])
        x0 = _unit_features(rng, n, 4)
        for t in BOUND_T_GRID:
            exact = exact_heat_kernel(eig, t, x0)
            for k in BOUND_K_GRID:
                approx = euler_propagate(x0, s, t, k)
                err = float(np.linalg.norm(approx - exact))
                bound = euler_error_bound(t, k, norm_l, 1.0)
                report.bound_checks += 1
                if err > bound + ROUNDOFF_ATOL:
                    report.bound_violations += 1
        # per-step truncation: one Euler step away from the exact trajectory
        for t0 in (0.0, 0.5, 1.5):
            x_t = exact_heat_kernel(eig, t0, x0)
            for h in (1.0, 0.5, 0.25):
                stepped = euler_propagate(x_t, s, h, 1)
                exact_next = exact_heat_kernel(eig, h, x_t)
                err = float(np.linalg.norm(stepped - exact_next))
                bound = euler_truncation_bound(h, norm_l, 1.0)
                report.truncation_checks += 1
                if err > bound + ROUNDOFF_ATOL:
                    report.truncation_violations += 1
    if report.bound_violations:
        report.failures.append(
            f"euler error bound violated {report.bound_violations}"
            f"/{report.bound_checks} times"
        )
    if report.truncation_violations:
        report.failures.append(
            f"truncation bound violated {report.truncation_violations}"
            f"/{report.truncation_checks} times"
        )


def measure_slope(errors: dict[int, float]) -> float:
    """Mean log2 error ratio between consecutive K doublings, skipping pairs
    at or below the floating-point floor."""
    ks = sorted(errors)
    ratios = []
    for a, b in zip(ks, ks[1:]):
        if errors[a] > ERROR_FLOOR and errors[b] > ERROR_FLOOR:
            ratios.append(math.log2(errors[a] / errors[b]))
    return float(np.mean(ratios)) if ratios else float("nan")


def check_convergence(report: VerificationReport, rng: np.random.Generator,
                      graphs: int = 5, t: float = 2.0) -> None:
    """Measured order of accuracy vs. the dense oracle: ~1 for Euler, ~4 for RK4."""
    euler_slopes = []
    rk4_slopes = []
    for _ in range(graphs):
        n = int(rng.integers(8, 25))
        g = random_er_graph(rng, n)
        s = normalize(g, "aug")
        eig = eigendecompose(laplacian(s).to_dense())
        x0 = _unit_features(rng, n, 3)
        exact = exact_heat_kernel(eig, t, x0)
        eul = {k: float(np.linalg.norm(euler_propagate(x0, s, t, k) - exact))
               for k in SLOPE_K_GRID}
        rk = {k: float(np.linalg.norm(rk4_propagate(x0, s, t, k) - exact))
              for k in SLOPE_K_GRID}
        euler_slopes.append(measure_slope(eul))
        rk4_slopes.append(measure_slope(rk))
    report.euler_slope = float(np.nanmean(euler_slopes))
    report.rk4_slope = float(np.nanmean(rk4_slopes))
    if not 0.8 <= report.euler_slope <= 1.2:
        report.failures.append(f"euler slope {report.euler_slope:.3f} outside [0.8, 1.2]")
    if not 3.5 <= report.rk4_slope <= 4.5:
        report.failures.append(f"rk4 slope {report.rk4_slope:.3f} outside [3.5, 4.5]")


def check_equilibrium(report: VerificationReport, rng: np.random.Generator,
                      graphs: int = 10) -> None:
    """sqrt(augmented degree) is a fixed point of every aug propagation."""
    worst = 0.0
    for _ in range(graphs):
        n = int(rng.integers(2, 33))
        g = random_er_graph(rng, n)
        s = normalize(g, "aug")
        v = np.sqrt(g.degrees() + 1.0).reshape(n, 1)
        scale = float(np.linalg.norm(v))
        for t, k in ((1.0, 1), (3.7, 11), (10.0, 200)):
            out = euler_propagate(v, s, t, k)
            worst = max(worst, float(np.linalg.norm(out - v)) / scale)
            out = rk4_propagate(v, s, t, k)
            worst = max(worst, float(np.linalg.norm(out - v)) / scale)
    report.equilibrium_max_rel_err = worst
    if worst > 1e-12:
        report.failures.append(f"equilibrium drift {worst:.3e} > 1e-12")


def check_semigroup(report: VerificationReport, rng: np.random.Generator,
                    graphs: int = 10) -> None:
    """H_s H_t = H_{s+t} on the dense oracle."""
    worst = 0.0
    for _ in range(graphs):
        n = int(rng.integers(2, 25))
        g = random_er_graph(rng, n)
        eig = eigendecompose(laplacian(normalize(g, "aug")).to_dense())
        x = _unit_features(rng, n, 3)
        for s_t, t_t in ((0.5, 1.5), (2.0, 2.0), (0.1, 4.0)):
            once = exact_heat_kernel(eig, s_t + t_t, x)
            twice = exact_heat_kernel(eig, s_t, exact_heat_kernel(eig, t_t, x))
            worst = max(worst, float(np.linalg.norm(once - twice)))
    report.semigroup_max_err = worst
    if worst > 1e-10:
        report.failures.append(f"semigroup error {worst:.3e} > 1e-10")


def check_gradients(report: VerificationReport, rng: np.random.Generator,
                    instances: int = 50, fd_step: float = 1e-5) -> None:
    """Analytic loss gradients vs. central finite differences."""
    worst = 0.0
    for _ in range(instances):
        n = int(rng.integers(2, 11))
        d = int(rng.integers(1, 6))
        c = int(rng.integers(2, 5))
        x = rng.standard_normal((n, d))
        labels = rng.integers(0, c, size=n).astype(np.int64)
        mask = np.zeros(n, dtype=bool)
        mask[rng.integers(0, n, size=max(1, n // 2))] = True
        wd = float(rng.choice([0.0, 1e-3, 1e-1]))
        model = SoftmaxModel(
            theta=rng.standard_normal((d, c)), bias=rng.standard_normal(c)
        )
        _, g_theta, g_bias = loss_and_grad(model, x, labels, mask, wd)

        def f(theta, bias):
            l, _, _ = loss_and_grad(SoftmaxModel(theta, bias), x, labels, mask, wd)
            return l

        fd_theta = np.zeros_like(g_theta)
        for i in range(d):
            for j in range(c):
                tp, tm = model.theta.copy(), model.theta.copy()
                tp[i, j] += fd_step
                tm[i, j] -= fd_step
                fd_theta[i, j] = (f(tp, model.bias) - f(tm, model.bias)) / (2 * fd_step)
        fd_bias = np.zeros_like(g_bias)
        for j in range(c):
            bp, bm = model.bias.copy(), model.bias.copy()
            bp[j] += fd_step
            bm[j] -= fd_step
            fd_bias[j] = (f(model.theta, bp) - f(model.theta, bm)) / (2 * fd_step)

        scale = max(1.0, float(np.abs(g_theta).max()), float(np.abs(g_bias).max()))
        worst = max(
            worst,
            float(np.abs(fd_theta - g_theta).max()) / scale,
            float(np.abs(fd_bias - g_bias).max()) / scale,
        )
    report.gradient_max_rel_err = worst
    if worst > 1e-6:
        report.failures.append(f"gradient mismatch {worst:.3e} > 1e-6")


def run_verification(seed: int = 0, bound_graphs: int = 100) -> VerificationReport:
    """Run every check with a single seeded generator; deterministic."""
    report = VerificationReport(seed=seed)
    rng = np.random.default_rng(seed)
    check_error_bound(report, rng, graphs=bound_graphs)
    check_convergence(report, rng)
    check_equilibrium(report, rng)
    check_semigroup(report, rng)
    check_gradients(report, rng)
    return report
