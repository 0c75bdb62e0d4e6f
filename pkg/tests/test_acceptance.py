"""End-to-end acceptance gate.

Each test prints one PASS/FAIL line for its criterion. The heavy Monte
Carlo checks use fixed seeds, so reruns are deterministic.
"""

import math
import os
import time

import numpy as np
import pytest

from restricted_var import (
    Banded,
    BoundConfig,
    ExperimentConfig,
    GramianCache,
    GridPoint,
    Grouped,
    Network,
    ScaledIdentity,
    Unrestricted,
    CompanionVarP,
    VarModel,
    build_basis,
    check_fast_rate,
    check_slope_collapse,
    classify_phase,
    emit_csv,
    estimation_error,
    fit,
    fit_dense_oracle,
    gamma_Rk,
    geometric_gramian_scalar,
    kappa,
    kl_divergence,
    make_dgp,
    run_experiment,
    sigma_x_norm,
    sigma_x_norm_dense,
    simulate,
    thm3_bound,
)
from restricted_var.bounds import inner_gram
from restricted_var.var_core import SamplePath

WORKERS = min(8, os.cpu_count() or 1)


def report(num: int, ok: bool, detail: str) -> None:
    print(f"[acceptance] criterion {num}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, f"criterion {num} failed: {detail}"


def test_criterion_1_oracle_equivalence():
    """Structured fit agrees with the dense pseudoinverse oracle."""
    from test_estimator import random_instance

    rng = np.random.default_rng(2024)
    start = time.time()
    worst = 0.0
    for _ in range(100):
        path, basis = random_instance(rng)
        a = fit(path, basis)
        b = fit_dense_oracle(path, basis)
        scale = max(1.0, float(np.max(np.abs(b.beta_hat))))
        worst = max(worst, float(np.max(np.abs(a.beta_hat - b.beta_hat))) / scale)
    elapsed = time.time() - start
    ok = worst <= 1e-8 and elapsed < 10.0
    report(1, ok, f"max relative deviation {worst:.2e} over 100 instances, "
                  f"{elapsed:.1f}s")


def test_criterion_2_slow_rate_collapse():
    """Stable errors collapse onto one line against (m/n)^(1/2)."""
    from restricted_var.experiments import X_GRID_FIG1, _n_from_ratio

    d, rho = 24, 0.2
    grid = []
    for k0 in (1, 3, 7):
        pat = Banded(d=d, k0=k0)
        m = build_basis(pat).m
        for x in X_GRID_FIG1:
            grid.append(GridPoint(dgp=3, rho=rho, d=d, n=_n_from_ratio(m, x),
                                  fit_pattern=pat))
    cfg = ExperimentConfig("acc2", grid, replications=200, base_seed=0)
    summary = run_experiment(cfg, workers=WORKERS)
    out = check_slope_collapse(summary)[(3, rho)]
    ratio = out["slope_ratio"]
    min_r2 = min(out["r2"].values())
    ok = 1.0 <= ratio <= 1.10 and min_r2 >= 0.99
    report(2, ok, f"slope ratio {ratio:.4f} across m=70/156/304, "
                  f"min R^2 {min_r2:.5f}")


def test_criterion_3_fast_rate_at_unit_root():
    """Unit-root errors decay like 1/n, not 1/sqrt(n)."""
    d = 24
    pat = Banded(d=d, k0=1)
    grid = [GridPoint(dgp=3, rho=1.0, d=d, n=n, fit_pattern=pat)
            for n in (200, 400, 800, 1600)]
    cfg = ExperimentConfig("acc3", grid, replications=200, base_seed=0)
    summary = run_experiment(cfg, workers=WORKERS)
    out = check_fast_rate(summary, mode="n")
    ok = (out["tail_change_n_error"] <= 0.20
          and out["tail_change_sqrt_n_error"] >= 0.25)
    report(3, ok, f"tail change of n*err {out['tail_change_n_error']:.3f}, "
                  f"of sqrt(n)*err {out['tail_change_sqrt_n_error']:.3f}")


def test_criterion_4_dimension_independence():
    """With m = 1 the mean error does not move with the ambient dimension."""
    means = {}
    for d in (25, 100, 400):
        grid = [GridPoint(dgp=3, rho=0.2, d=d, n=100,
                          fit_pattern=ScaledIdentity(d=d))]
        cfg = ExperimentConfig("acc4", grid, replications=600, base_seed=0)
        summary = run_experiment(cfg, workers=1)
        means[d] = summary.rows[0]["mean_error"]
    vals = list(means.values())
    ratio = max(vals) / min(vals)
    ok = ratio <= 1.10
    report(4, ok, "mean errors " +
           ", ".join(f"d={d}: {v:.4f}" for d, v in means.items()) +
           f"; max/min {ratio:.4f}")


def test_criterion_5_gamma_rk_closed_form():
    """lambda_max(Gamma_{R,k}) = 1/gamma_k(rho) when A = rho I, any basis."""
    patterns = [
        Unrestricted(d=6),
        Banded(d=6, k0=1),
        Banded(d=6, k0=2),
        Network(d=6, adjacency=np.tri(6, 6, -1, dtype=bool).T),
        Grouped(d=6, K=2),
        ScaledIdentity(d=6),
        CompanionVarP(d0=3, p=2),
    ]
    worst = 0.0
    for rho in (0.0, 0.3, 0.9, 1.0, 1.05):
        cache = GramianCache(rho * np.eye(6))
        for pat in patterns:
            basis = build_basis(pat)
            got = gamma_Rk(basis, cache, 1)["lambda_max"]
            worst = max(worst, abs(got - 1.0))
            for k in (5, 20):
                got = gamma_Rk(basis, cache, k)["lambda_max"]
                expect = 1.0 / geometric_gramian_scalar(rho, k)
                worst = max(worst, abs(got - expect) / expect)
    ok = worst <= 1e-10
    report(5, ok, f"max deviation {worst:.2e} over 5 radii x 3 block sizes "
                  f"x {len(patterns)} bases")


def test_criterion_6_monotonicity_suite():
    """Loewner/eigenvalue monotonicity of the bound ingredients, 20 cases."""
    rng = np.random.default_rng(6)

    def scaled(rho):
        A = rng.standard_normal((6, 6))
        return A * (rho / np.max(np.abs(np.linalg.eigvals(A))))

    models = [np.zeros((6, 6)), 0.3 * np.eye(6), np.eye(6),
              scaled(0.7), scaled(0.95)]
    bases = [build_basis(p) for p in (
        Unrestricted(d=6), Banded(d=6, k0=1), ScaledIdentity(d=6),
        Grouped(d=6, K=2))]
    worst_slack = 0.0
    cases = 0
    for A in models:
        cache = GramianCache(A)
        for basis in bases:
            cases += 1
            for t in (1, 4, 9):
                diff = cache.gramian(t + 1) - cache.gramian(t)
                worst_slack = min(worst_slack,
                                  float(np.min(np.linalg.eigvalsh(diff))))
                inner_diff = (inner_gram(basis, cache.gramian(t + 1))
                              - inner_gram(basis, cache.gramian(t)))
                worst_slack = min(worst_slack,
                                  float(np.min(np.linalg.eigvalsh(inner_diff))))
            lams = [gamma_Rk(basis, cache, k)["lambda_max"] for k in (1, 3, 8)]
            for a, b in zip(lams, lams[1:]):
                worst_slack = min(worst_slack, a - b)
            kaps = [kappa(basis, cache, n) for n in (2, 6, 12)]
            for a, b in zip(kaps, kaps[1:]):
                worst_slack = min(worst_slack, b - a)
        # nested-basis ordering: finer span gives a smaller Gamma_{R,k}
        chain = [build_basis(p) for p in (
            ScaledIdentity(d=6), Banded(d=6, k0=1), Banded(d=6, k0=2),
            Unrestricted(d=6))]
        for fine, coarse in zip(chain, chain[1:]):
            diff = (gamma_Rk(coarse, cache, 5)["matrix"]
                    - gamma_Rk(fine, cache, 5)["matrix"])
            worst_slack = min(worst_slack,
                              float(np.min(np.linalg.eigvalsh(diff))))
    ok = cases == 20 and worst_slack >= -1e-9
    report(6, ok, f"{cases} model/basis cases plus nested-basis orderings, "
                  f"worst eigenvalue slack {worst_slack:.2e}")


def test_criterion_7_kl_matches_log_likelihood_ratio():
    """The closed-form KL equals the Monte Carlo mean log-likelihood ratio."""
    basis = build_basis(Unrestricted(d=2))
    theta = np.array([0.5, 0.1, 0.0, 0.3])
    theta0 = np.array([0.4, 0.1, 0.1, 0.3])
    A = basis.coefficient_matrix(theta)
    A0 = basis.coefficient_matrix(theta0)
    n, reps = 10, 10_000
    kl = kl_divergence(theta, theta0, basis, n)
    assert kl_divergence(theta, theta, basis, n) == 0.0

    model = VarModel(A=A, sigma2=1.0)
    ss = np.random.SeedSequence(7)
    llrs = np.empty(reps)
    for r, child in enumerate(ss.spawn(reps)):
        path = simulate(model, n, child)
        r1 = path.Y - path.X @ A.T
        r0 = path.Y - path.X @ A0.T
        llrs[r] = 0.5 * (np.sum(r0 ** 2) - np.sum(r1 ** 2))
    mc = float(np.mean(llrs))
    se = float(np.std(llrs, ddof=1) / math.sqrt(reps))
    ok = abs(mc - kl) <= 3.0 * se
    report(7, ok, f"KL {kl:.5f}, MC mean LLR {mc:.5f} +/- {se:.5f} "
                  f"({reps} paths)")


def test_criterion_8_sigma_x_norm_matrix_free():
    """Matrix-free ||Sigma_X||_2 matches the dense eigenvalue oracle."""
    rng = np.random.default_rng(8)
    worst = 0.0
    for d, n in ((4, 50), (8, 100), (2, 500)):
        A = rng.standard_normal((d, d))
        A *= 0.9 / np.max(np.abs(np.linalg.eigvals(A)))
        model = VarModel(A=A, sigma2=1.0)
        dense = sigma_x_norm_dense(model, n)
        free = sigma_x_norm(model, n)
        worst = max(worst, abs(free - dense) / dense)
    ok = worst <= 1e-6
    report(8, ok, f"max relative deviation {worst:.2e} over "
                  "(d,n) in {(4,50),(8,100),(2,500)}")


def test_criterion_9_phase_classifier():
    """Slow/fast classification plus the fast-rate arithmetic identity."""
    slow = classify_phase(make_dgp(3, 24, rho=0.2), 70, 24, 400,
                          BoundConfig(regime="stable2", delta=0.05))
    fast_cfg = BoundConfig(regime="explosive", delta=0.05)
    model = make_dgp(3, 24, rho=1.0)
    fast = classify_phase(model, 70, 24, 400, fast_cfg)
    out = thm3_bound(model, 1, 24, 400, fast_cfg)
    expected = (math.log(24 / 0.05) + math.log(400)) / 400
    dev = abs(out["value"] - expected)
    ok = (slow["phase"] == "slow" and fast["phase"] == "fast"
          and out["phase"] == "fast" and dev <= 1e-12
          and abs(expected - 0.0304131) < 1e-6)
    report(9, ok, f"rho=0.2 -> {slow['phase']}, rho=1 -> {fast['phase']}, "
                  f"fast value {out['value']:.7f} (identity dev {dev:.1e})")


def test_criterion_10_deterministic_replication(tmp_path):
    """The replication preset is byte-identical across worker counts."""
    from restricted_var.experiments import preset_fig1

    cfg = preset_fig1(replications=10, base_seed=0)
    f1, f8 = tmp_path / "w1.csv", tmp_path / "w8.csv"
    emit_csv(run_experiment(cfg, workers=1), f1)
    emit_csv(run_experiment(cfg, workers=8), f8)
    b1, b8 = f1.read_bytes(), f8.read_bytes()
    ok = b1 == b8 and len(b1) > 0
    report(10, ok, f"{len(cfg.grid)} grid points x 10 replications, "
                   f"{len(b1)} bytes, workers 1 vs 8")
