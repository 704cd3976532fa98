"""Acceptance criteria, one test per criterion.

Each test prints a single ``PASS`` or ``FAIL`` line describing the measured
quantities, then asserts the criterion.
"""

import math
import time

import numpy as np
import pytest

from hybrid_sbp.global_assembly import ProblemData, assemble_global, discretize, flux_recovery
from hybrid_sbp.mesh import build_trace_numbering, builtin_mesh
from hybrid_sbp.sbp1d import (
    borrowing_constants,
    build_first_derivative,
    build_second_derivative,
    check_first_derivative,
)
from hybrid_sbp.solve import SOLVER_PATHS, min_eigenvalue, solve_system, trace_schur_matrix, volume_schur_matrix
from hybrid_sbp.verify import (
    convergence_study,
    flux_antisymmetry,
    global_spd_suite,
    local_spd_suite,
    loglog_slope,
    spd_grid_size,
    tau_sweep,
)

ORDERS = (1, 2, 3)

# reference errors at N = 17 * 2^k, k = 0..3
VOLUME_REFERENCE = {
    1: [2.90e-4, 7.23e-5, 1.80e-5, 4.51e-6],
    2: [1.81e-6, 1.25e-7, 8.32e-9, 5.45e-10],
    3: [3.02e-7, 1.10e-8, 4.26e-10, 1.42e-11],
}
INTERFACE_REFERENCE = {
    1: [4.93e-3, 1.83e-3, 6.66e-4, 2.39e-4],
    2: [1.35e-4, 2.69e-5, 5.03e-6, 9.16e-7],
    3: [2.39e-5, 2.53e-6, 2.46e-7, 2.28e-8],
}
VOLUME_RATE = {1: (2.00, 0.1), 2: (3.93, 0.2), 3: (4.90, 0.25)}
INTERFACE_RATE = {1: (1.48, 0.15), 2: (2.46, 0.2), 3: (3.43, 0.25)}
LEVELS = 4


def report(capsys, number: int, ok: bool, detail: str) -> None:
    with capsys.disabled():
        print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")


@pytest.fixture(scope="module")
def convergence():
    """MMS sweep on the disk mesh for all orders, shared by criteria 8, 9 and 12."""
    mesh = builtin_mesh("disk56")
    out = {}
    for p in ORDERS:
        stamps = []
        t0 = time.perf_counter()
        rows = convergence_study(mesh, p, levels=LEVELS, N0=17, progress=lambda r: stamps.append(time.perf_counter() - t0))
        out[p] = (rows, stamps)
    return out


def test_criterion_01_sbp_identities(capsys):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst_sbp, worst_exact, worst_rem, min_gap = 0.0, 0.0, 0.0, np.inf
    for p in ORDERS:
        for N in (12, 24):
            ops = build_first_derivative(p, N)
            e = check_first_derivative(ops)
            worst_sbp = max(worst_sbp, e["sbp"])
            worst_exact = max(worst_exact, e["interior_exactness"], e["boundary_exactness"], e["constant"])
            for _ in range(20):
                c = rng.uniform(0.1, 10.0, N + 1)
                d2 = build_second_derivative(ops, c)
                A = d2.A
                w = np.linalg.eigvalsh(A)
                # A annihilates constants; positive definite on their complement
                min_gap = min(min_gap, w[1] / w[-1])
                worst_rem = min(worst_rem, w[0] / w[-1])
                R = A - ops.D.T @ ((c * ops.H)[:, None] * ops.D)
                worst_rem = min(worst_rem, np.linalg.eigvalsh(0.5 * (R + R.T))[0] / w[-1])
    elapsed = time.perf_counter() - t0
    ok = worst_sbp < 1e-13 and worst_exact < 1e-7 and worst_rem > -1e-10 and min_gap > 0 and elapsed < 10
    report(
        capsys,
        1,
        ok,
        f"max |Q+Q^T-B| = {worst_sbp:.1e}, exactness {worst_exact:.1e}, min scaled eig of A/R {worst_rem:.1e}, "
        f"A positive on constants' complement (gap {min_gap:.1e}), {elapsed:.1f} s",
    )
    assert ok


def test_criterion_02_borrowing_constants(capsys):
    got = [(2 * p, borrowing_constants(p).beta) for p in ORDERS]
    ok = got == [(2, 0.363636363), (4, 0.2505765857), (6, 0.1878687080)]
    report(capsys, 2, ok, f"stored beta values {got}")
    assert ok


def test_criterion_03_local_spd(capsys):
    parts, ok = [], True
    for p in ORDERS:
        literal, N = spd_grid_size(p, "3p+2")
        t0 = time.perf_counter()
        rows = local_spd_suite(p, N, "all-dirichlet", samples=100, seed=p)
        dt = time.perf_counter() - t0
        npos = sum(r["lambda_min"] > 0 for r in rows)
        ok &= npos == 100 and dt < 60
        parts.append(f"2p={2 * p} N={N}: {npos}/100 in {dt:.1f} s")
    report(capsys, 3, ok, "; ".join(parts))
    assert ok


def test_criterion_04_neumann(capsys):
    parts, ok = [], True
    for p in ORDERS:
        _, N = spd_grid_size(p, "3p+2")
        mixed = local_spd_suite(p, N, "one-dirichlet", samples=100, seed=10 + p)
        neu = local_spd_suite(p, N, "all-neumann", samples=100, seed=20 + p)
        npos = sum(r["lambda_min"] > 0 for r in mixed)
        worst = max(r["relative"] for r in neu)
        corr = min(r["ones_correlation"] for r in neu)
        ok &= npos == 100 and worst < 1e-12 and corr > 0.999
        parts.append(f"2p={2 * p}: 3N1D {npos}/100, all-N max |lmin|/|M| {worst:.1e}, corr {corr:.6f}")
    report(capsys, 4, ok, "; ".join(parts))
    assert ok


def test_criterion_05_global_spd(capsys):
    parts, ok = [], True
    for p in ORDERS:
        _, N = spd_grid_size(p, "3p-1")
        rows = global_spd_suite(p, N, samples=100, seed=30 + p)
        counts = {k: sum(r[k] > 0 for r in rows) for k in ("monolithic", "trace", "volume")}
        ok &= all(v == 100 for v in counts.values())
        parts.append(f"2p={2 * p} N={N}: " + ", ".join(f"{k} {v}/100" for k, v in counts.items()))
    report(capsys, 5, ok, "; ".join(parts))
    assert ok


def test_criterion_06_tau_sweep(capsys):
    parts, ok = [], True
    scales = [2.0**k for k in range(11)]
    for p in ORDERS:
        N = max(16, spd_grid_size(p, "3p+2")[1])
        rows = tau_sweep(p, N, scales, seed=40 + p)
        plateau = [r["lambda_min"] for r in rows if r["tau_scale"] >= 4]
        spread = (max(plateau) - min(plateau)) / max(plateau)
        top = [r for r in rows if 2**6 <= r["tau_scale"] <= 2**10]
        slope = loglog_slope([r["tau_scale"] for r in top], [r["lambda_max"] for r in top])
        pd = rows[0]["lambda_min"] > 0
        ok &= spread < 0.10 and abs(slope - 1) <= 0.05 and pd
        parts.append(f"2p={2 * p}: lambda_min spread {100 * spread:.2f}%, lambda_max slope {slope:.4f}")
    report(capsys, 6, ok, "; ".join(parts))
    assert ok


def _manufactured_like_data():
    return ProblemData(
        forcing=lambda b, x, y: np.sin(2 * x) * np.cos(y),
        dirichlet=lambda b, x, y: np.exp(0.3 * x) + y * y,
        neumann=lambda b, x, y, nx, ny: 0.3 * nx + 2 * y * ny,
        jump=lambda f, x, y: 0.1 * x,
    )


def test_criterion_07_three_paths(capsys):
    parts, ok = [], True
    data = _manufactured_like_data()
    for name in ("two-block", "disk56"):
        mesh = builtin_mesh(name)
        for p in ORDERS:
            sysm = assemble_global(discretize(mesh, p, 17), data)
            sols = [solve_system(sysm, path) for path in SOLVER_PATHS]
            ref = sols[0].u
            diff = max(np.abs(s.u - ref).max() / np.abs(ref).max() for s in sols[1:])
            ok &= diff < 1e-8
            parts.append(f"{name} 2p={2 * p}: {diff:.1e}")
    report(capsys, 7, ok, "max relative difference " + "; ".join(parts))
    assert ok


def _within(vals, refs, factor=3.0):
    return all(v / r <= factor and r / v <= factor for v, r in zip(vals, refs))


def test_criterion_08_volume_convergence(convergence, capsys):
    parts, ok = [], True
    for p in ORDERS:
        rows, stamps = convergence[p]
        errs = [r.volume_error for r in rows]
        refs = VOLUME_REFERENCE[p][: len(rows)]
        rate = rows[-1].volume_rate
        target, tol = VOLUME_RATE[p]
        fit = _within(errs, refs)
        t2 = stamps[min(2, len(stamps) - 1)]
        ok &= fit and abs(rate - target) <= tol and t2 < 600
        ratio = max(max(e / r, r / e) for e, r in zip(errs, refs))
        parts.append(f"2p={2 * p}: k=0..{len(rows) - 1} worst error ratio {ratio:.2f}, finest rate {rate:.3f} (target {target}+-{tol}), k<=2 in {t2:.0f} s")
    report(capsys, 8, ok, "; ".join(parts))
    assert ok


def test_criterion_09_interface_convergence(convergence, capsys):
    parts, ok = [], True
    for p in ORDERS:
        rows, _ = convergence[p]
        errs = [r.interface_error for r in rows]
        refs = INTERFACE_REFERENCE[p][: len(rows)]
        rate = rows[-1].interface_rate
        target, tol = INTERFACE_RATE[p]
        fit = _within(errs, refs)
        ok &= fit and abs(rate - target) <= tol
        ratio = max(max(e / r, r / e) for e, r in zip(errs, refs))
        parts.append(f"2p={2 * p}: worst error ratio {ratio:.2f}, finest rate {rate:.3f} (target {target}+-{tol})")
    report(capsys, 9, ok, "; ".join(parts))
    assert ok


def test_criterion_10_point_counts(capsys):
    mesh = builtin_mesh("disk56")
    vol, tr = [], []
    for k in range(4):
        num = build_trace_numbering(mesh, 17 * 2**k)
        vol.append(num.n_volume)
        tr.append(num.n_trace)
    ok = (
        mesh.n_blocks == 56
        and mesh.n_interfaces == 96
        and vol == [18144, 68600, 266616, 1051064]
        and tr == [1728, 3360, 6624, 13152]
    )
    report(capsys, 10, ok, f"N_b={mesh.n_blocks}, N_I={mesh.n_interfaces}, volume {vol}, trace {tr}")
    assert ok


def test_criterion_11_exactness(capsys):
    def linear(b, x, y):
        return 0.7 + 1.3 * x - 0.4 * y

    lin = ProblemData(
        forcing=lambda b, x, y: np.zeros_like(x),
        dirichlet=linear,
        neumann=lambda b, x, y, nx, ny: 1.3 * nx - 0.4 * ny,
        jump=lambda f, x, y: np.zeros_like(x),
    )
    const = ProblemData(
        forcing=lambda b, x, y: np.zeros_like(x),
        dirichlet=lambda b, x, y: np.ones_like(x),
        neumann=lambda b, x, y, nx, ny: np.zeros_like(x),
        jump=lambda f, x, y: np.zeros_like(x),
    )
    worst_lin, worst_const, parts = {}, 0.0, []
    for name in ("single", "two-block", "disk56"):
        mesh = builtin_mesh(name)
        for p in ORDERS:
            disc = discretize(mesh, p, 17)
            exact = np.concatenate([linear(b, g.metrics.x, g.metrics.y).ravel() for b, g in enumerate(disc.geometry)])
            u = solve_system(assemble_global(disc, lin), "trace").u
            worst_lin[(name, p)] = float(np.abs(u - exact).max())
            u1 = solve_system(assemble_global(disc, const), "trace").u
            worst_const = max(worst_const, float(np.abs(u1 - 1).max()))
    ok_lin = all(v < 1e-10 for v in worst_lin.values())
    ok = ok_lin and worst_const < 1e-11
    for (name, p), v in worst_lin.items():
        parts.append(f"{name} 2p={2 * p} {v:.1e}")
    report(capsys, 11, ok, f"constant state max error {worst_const:.1e}; linear max error " + ", ".join(parts))
    assert ok


def test_criterion_12_flux_antisymmetry(convergence, capsys):
    worst = max(r.flux_antisymmetry for p in ORDERS for r in convergence[p][0])
    data = _manufactured_like_data()
    for p in ORDERS:
        sysm = assemble_global(discretize(builtin_mesh("two-block"), p, 17), data)
        sol = solve_system(sysm, "trace")
        worst = max(worst, flux_antisymmetry(sysm, flux_recovery(sysm, sol.u, sol.lam, data)))
    ok = worst < 1e-9
    report(capsys, 12, ok, f"max |sigma+ + sigma-| over all solved interfaces {worst:.1e}")
    assert ok
