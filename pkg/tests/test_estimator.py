import numpy as np
import pytest

from restricted_var import (
    Banded,
    Custom,
    Grouped,
    RestrictionBasis,
    ScaledIdentity,
    Unrestricted,
    VarModel,
    build_basis,
    constraints_from_basis,
    estimation_error,
    fit,
    fit_dense_oracle,
    make_dgp,
    simulate,
)
from restricted_var.var_core import SamplePath


def random_instance(rng):
    """A random small (path, basis) pair covering every pattern kind."""
    from restricted_var import CompanionVarP, Network

    d = int(rng.integers(2, 7))
    kind = int(rng.integers(0, 7))
    if kind == 0:
        basis = build_basis(Unrestricted(d=d))
    elif kind == 1:
        d = max(d, 3)
        basis = build_basis(Banded(d=d, k0=int(rng.integers(1, (d - 1) // 2 + 1))))
    elif kind == 2:
        basis = build_basis(ScaledIdentity(d=d))
    elif kind == 3:
        if d % 2:
            d += 1
        basis = build_basis(Grouped(d=d, K=2 if d > 2 else 1))
    elif kind == 4:
        adj = rng.random((d, d)) < 0.4
        np.fill_diagonal(adj, False)
        adj[0, (0 + 1) % d] = True
        basis = build_basis(Network(d=d, adjacency=adj))
    elif kind == 5:
        d0, p = int(rng.integers(2, 4)), int(rng.integers(1, 3))
        basis = build_basis(CompanionVarP(d0=d0, p=p))
        d = d0 * p
    else:
        N = d * d
        idx = rng.permutation(N)
        zero = tuple(int(i) for i in idx[: N // 4])
        ec = (tuple(int(i) for i in idx[N // 4 : N // 4 + 2]),)
        fv = ((int(idx[N // 4 + 2]), float(rng.normal())),)
        basis = build_basis(Custom(zero_set=zero, equality_classes=ec,
                                   fixed_values=fv), shape=(d, d))
    n = int(rng.integers(basis.m // basis.q + d + 2, 50))
    X = rng.standard_normal((n, d))
    Y = rng.standard_normal((n, d))
    return SamplePath(X=X, Y=Y), basis


class TestAgainstOracle:
    def test_random_instances(self):
        rng = np.random.default_rng(123)
        for _ in range(30):
            path, basis = random_instance(rng)
            a = fit(path, basis)
            b = fit_dense_oracle(path, basis)
            scale = max(1.0, float(np.max(np.abs(b.beta_hat))))
            np.testing.assert_allclose(a.beta_hat, b.beta_hat, atol=1e-8 * scale)
            assert a.residual_sse == pytest.approx(b.residual_sse, rel=1e-8, abs=1e-8)

    def test_oracle_guard(self):
        path = SamplePath(X=np.zeros((4000, 60)), Y=np.zeros((4000, 60)))
        basis = build_basis(Unrestricted(d=60))
        with pytest.raises(ValueError, match="guard"):
            fit_dense_oracle(path, basis)


class TestFit:
    def test_scalar_ar1_closed_form(self):
        rng = np.random.default_rng(0)
        x = rng.standard_normal(50)
        y = 0.6 * x + 0.1 * rng.standard_normal(50)
        path = SamplePath(X=x[:, None], Y=y[:, None])
        res = fit(path, build_basis(Unrestricted(d=1)))
        assert res.theta_hat[0] == pytest.approx(float(x @ y / (x @ x)), rel=1e-12)

    def test_noiseless_exact_recovery(self):
        rng = np.random.default_rng(7)
        basis = build_basis(Banded(d=5, k0=1))
        theta_star = rng.standard_normal(basis.m)
        A = basis.coefficient_matrix(theta_star)
        X = rng.standard_normal((40, 5))
        path = SamplePath(X=X, Y=X @ A.T)
        res = fit(path, basis)
        np.testing.assert_allclose(res.theta_hat, theta_star, atol=1e-8)
        assert res.residual_sse == pytest.approx(0.0, abs=1e-14)
        assert not res.rank_flag

    def test_basis_reparametrization_invariance(self):
        rng = np.random.default_rng(9)
        basis = build_basis(Grouped(d=6, K=2))
        Q, _ = np.linalg.qr(rng.standard_normal((basis.m, basis.m)))
        rotated = RestrictionBasis(R=basis.R @ Q, gamma=basis.gamma,
                                   q=basis.q, d=basis.d)
        path = simulate(VarModel(A=0.4 * np.eye(6)), 50, seed=1)
        a = fit(path, basis)
        b = fit(path, rotated)
        np.testing.assert_allclose(a.beta_hat, b.beta_hat, atol=1e-8)

    def test_restrictions_hold_at_fit(self):
        rng = np.random.default_rng(11)
        basis = build_basis(Custom(zero_set=(1, 5), equality_classes=((0, 8),),
                                   fixed_values=((2, 1.5),)), shape=(3, 3))
        path = SamplePath(X=rng.standard_normal((20, 3)),
                          Y=rng.standard_normal((20, 3)))
        res = fit(path, basis)
        cf = constraints_from_basis(basis)
        np.testing.assert_allclose(cf.C @ res.beta_hat, cf.mu, atol=1e-10)
        assert res.beta_hat[1] == 0.0 and res.beta_hat[5] == 0.0
        assert res.beta_hat[2] == 1.5
        assert res.beta_hat[0] == pytest.approx(res.beta_hat[8], abs=1e-12)

    def test_normal_equations_residual(self):
        rng = np.random.default_rng(13)
        path, basis = random_instance(rng)
        res = fit(path, basis)
        if not res.rank_flag:
            np.testing.assert_allclose(res.gram @ res.theta_hat, res.rhs,
                                       atol=1e-8 * max(1.0, np.max(np.abs(res.rhs))))

    def test_infeasible_sample_size(self):
        path = SamplePath(X=np.zeros((2, 3)), Y=np.zeros((2, 3)))
        with pytest.raises(ValueError, match="infeasible"):
            fit(path, build_basis(Unrestricted(d=3)))

    def test_shape_mismatch(self):
        path = SamplePath(X=np.zeros((5, 3)), Y=np.zeros((5, 3)))
        with pytest.raises(ValueError, match="mismatch"):
            fit(path, build_basis(Unrestricted(d=4)))

    def test_rank_deficient_min_norm(self):
        # rank-1 design: both solvers must return the minimum-norm solution
        X = np.array([[1.0, 2.0], [1.0, 2.0], [1.0, 2.0], [1.0, 2.0]])
        Y = np.array([[1.0, 0.0], [1.0, 0.0], [1.0, 0.0], [1.0, 0.0]])
        path = SamplePath(X=X, Y=Y)
        basis = build_basis(Unrestricted(d=2))
        a = fit(path, basis)
        b = fit_dense_oracle(path, basis)
        assert a.rank_flag and b.rank_flag
        np.testing.assert_allclose(a.beta_hat, b.beta_hat, atol=1e-6)

    def test_fully_determined_basis(self):
        basis = build_basis(Custom(zero_set=(0, 1, 2), equality_classes=(),
                                   fixed_values=((3, 0.5),)), shape=(2, 2))
        assert basis.m == 0
        rng = np.random.default_rng(1)
        path = SamplePath(X=rng.standard_normal((6, 2)),
                          Y=rng.standard_normal((6, 2)))
        res = fit(path, basis)
        assert res.theta_hat.shape == (0,)
        np.testing.assert_array_equal(res.A_hat, np.array([[0.0, 0.0], [0.0, 0.5]]))
        b = fit_dense_oracle(path, basis)
        assert res.residual_sse == pytest.approx(b.residual_sse, rel=1e-12)

    def test_json_output(self):
        import json

        path = simulate(VarModel(A=0.2 * np.eye(2)), 10, seed=0)
        res = fit(path, build_basis(Unrestricted(d=2)))
        obj = json.loads(res.to_json_str())
        assert np.asarray(obj["A_hat"]).shape == (2, 2)
        assert "residual_sse" in obj


class TestEstimationError:
    def test_l2_equals_frobenius(self):
        A_hat = np.array([[1.0, 2.0], [3.0, 4.0]])
        A_star = np.zeros((2, 2))
        err = estimation_error(A_hat, A_star)
        assert err["l2"] == pytest.approx(np.sqrt(30.0))
        assert err["fro"] == err["l2"]
        assert err["spec"] <= err["fro"] + 1e-12

    def test_accepts_fit_result_and_model(self):
        model = make_dgp(3, 3, rho=0.5)
        path = simulate(model, 200, seed=0)
        res = fit(path, build_basis(ScaledIdentity(d=3)))
        err = estimation_error(res, model)
        assert 0 < err["l2"] < 1.0

    def test_consistency_in_n(self):
        model = make_dgp(3, 4, rho=0.5)
        basis = build_basis(ScaledIdentity(d=4))
        wins = 0
        for s in range(10):
            e_small = estimation_error(
                fit(simulate(model, 100, seed=(s, 0)), basis), model)["l2"]
            e_big = estimation_error(
                fit(simulate(model, 2000, seed=(s, 1)), basis), model)["l2"]
            wins += e_big < e_small
        assert wins >= 9
