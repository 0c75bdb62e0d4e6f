import io
import math

import numpy as np
import pytest
from scipy import stats as spstats

from restricted_var import (
    NormalLaw,
    ScaledStudentTLaw,
    SimulationOverflowError,
    VarModel,
    companion_embed,
    load_path_csv,
    make_dgp,
    save_path_csv,
    simulate,
    spectral_stats,
)


class TestSimulate:
    def test_seed_determinism(self):
        model = VarModel(A=0.5 * np.eye(3))
        p1 = simulate(model, 50, seed=7)
        p2 = simulate(model, 50, seed=7)
        np.testing.assert_array_equal(p1.X, p2.X)
        np.testing.assert_array_equal(p1.Y, p2.Y)
        p3 = simulate(model, 50, seed=8)
        assert not np.array_equal(p1.X, p3.X)

    def test_shift_identity(self):
        model = VarModel(A=np.array([[0.3, 0.1], [0.0, 0.4]]))
        path = simulate(model, 40, seed=1)
        np.testing.assert_array_equal(path.Y[:-1], path.X[1:])
        assert path.trajectory.shape == (41, 2)

    def test_zero_dynamics_is_iid_noise(self):
        # A = 0: the trajectory equals the innovations themselves
        model = VarModel(A=np.zeros((2, 2)), sigma2=4.0)
        path = simulate(model, 30, seed=3)
        rng = np.random.default_rng(3)
        eta = 2.0 * rng.standard_normal((31, 2))
        np.testing.assert_allclose(path.trajectory, eta, atol=1e-12)

    def test_variance_matches_gramian(self):
        from restricted_var import gramian

        A = np.array([[0.5, 0.2], [0.0, 0.3]])
        model = VarModel(A=A, sigma2=1.0)
        reps, t_max = 4000, 6
        acc = np.zeros((t_max, 2, 2))
        ss = np.random.SeedSequence(11)
        for child in ss.spawn(reps):
            traj = simulate(model, t_max, child).trajectory[:t_max]
            acc += traj[:, :, None] * traj[:, None, :]
        acc /= reps
        for t in range(1, t_max + 1):
            G = gramian(model, t)
            for i in range(2):
                # SE of a mean of chi-square-like terms
                se = math.sqrt(2.0) * G[i, i] / math.sqrt(reps)
                assert abs(acc[t - 1, i, i] - G[i, i]) <= 4.0 * se

    def test_random_walk_variance(self):
        model = VarModel(A=np.eye(1))
        reps, t = 3000, 10
        ss = np.random.SeedSequence(2)
        vals = np.array([simulate(model, t, c).trajectory[t - 1, 0]
                         for c in ss.spawn(reps)])
        mean_sq = float(np.mean(vals ** 2))
        se = math.sqrt(2.0) * t / math.sqrt(reps)
        assert abs(mean_sq - t) <= 4.0 * se

    def test_overflow_raises(self):
        model = VarModel(A=2.0 * np.eye(2))
        with pytest.raises(SimulationOverflowError) as exc:
            simulate(model, 2000, seed=0)
        assert exc.value.t < 2000

    def test_bad_inputs(self):
        with pytest.raises(ValueError):
            simulate(VarModel(A=np.eye(2)), 0, seed=0)
        with pytest.raises(ValueError):
            VarModel(A=np.ones((2, 3)))
        with pytest.raises(ValueError):
            VarModel(A=np.eye(2), sigma2=0.0)


class TestLaws:
    def test_normal_density_bound(self):
        assert NormalLaw().density_bound == pytest.approx(1.0 / math.sqrt(2 * math.pi))

    def test_student_t_density_bound(self):
        for nu in (3.0, 5.0, 30.0):
            law = ScaledStudentTLaw(dof=nu)
            expected = spstats.t.pdf(0.0, nu) * math.sqrt(nu / (nu - 2))
            assert law.density_bound == pytest.approx(expected, rel=1e-12)
        # heavy tails push the standardized peak above the normal one
        assert ScaledStudentTLaw(dof=3).density_bound > NormalLaw().density_bound

    def test_student_t_unit_variance(self):
        law = ScaledStudentTLaw(dof=5.0)
        rng = np.random.default_rng(0)
        draws = law.sample(rng, 200000, 1, 2.0).ravel()
        assert np.var(draws) == pytest.approx(4.0, rel=0.05)
        assert np.mean(draws) == pytest.approx(0.0, abs=0.05)

    def test_student_t_needs_dof_above_two(self):
        with pytest.raises(ValueError):
            ScaledStudentTLaw(dof=2.0)


class TestMakeDgp:
    def test_dgp1_banded_support_and_radius(self):
        model = make_dgp(1, 24, k0=1, target_rho=0.8, seed=0)
        A = model.A
        i, j = np.indices(A.shape)
        assert np.all(A[np.abs(i - j) > 1] == 0.0)
        rho = np.max(np.abs(np.linalg.eigvals(A)))
        assert rho == pytest.approx(0.8, abs=1e-10)

    def test_dgp2_group_structure(self):
        model = make_dgp(2, 24, K=2, target_rho=0.5, seed=1)
        A = model.A
        rho = np.max(np.abs(np.linalg.eigvals(A)))
        assert rho == pytest.approx(0.5, abs=1e-10)
        b = 12
        for i in range(24):
            for k in range(2):
                vals = [A[i, j] for j in range(k * b, (k + 1) * b) if j != i]
                assert np.ptp(vals) <= 1e-12

    def test_dgp3_exact(self):
        model = make_dgp(3, 5, rho=0.7)
        np.testing.assert_array_equal(model.A, 0.7 * np.eye(5))

    def test_dgp_seed_determinism(self):
        m1 = make_dgp(1, 8, k0=2, target_rho=1.0, seed=42)
        m2 = make_dgp(1, 8, k0=2, target_rho=1.0, seed=42)
        np.testing.assert_array_equal(m1.A, m2.A)

    def test_dgp_bad_inputs(self):
        with pytest.raises(ValueError):
            make_dgp(3, 4)
        with pytest.raises(ValueError):
            make_dgp(1, 4, k0=1)
        with pytest.raises(ValueError):
            make_dgp(2, 10, K=3, target_rho=0.5)


class TestCompanion:
    def test_eigenvalues_solve_lag_polynomial(self):
        rng = np.random.default_rng(4)
        A1 = 0.4 * rng.standard_normal((2, 2))
        A2 = 0.2 * rng.standard_normal((2, 2))
        model = companion_embed([A1, A2])
        assert model.d == 4
        assert model.noise_dim == 2
        for lam in np.linalg.eigvals(model.A):
            if abs(lam) < 1e-8:
                continue
            M = lam ** 2 * np.eye(2) - lam * A1 - A2
            assert abs(np.linalg.det(M)) <= 1e-8 * max(1.0, abs(lam) ** 4)

    def test_simulated_lag_copies(self):
        model = companion_embed([0.3 * np.eye(2), 0.1 * np.eye(2)])
        path = simulate(model, 20, seed=5)
        traj = path.trajectory
        # last d0 coordinates of X_{t+1} replicate the first d0 of X_t
        np.testing.assert_allclose(traj[1:, 2:], traj[:-1, :2], atol=1e-12)

    def test_p1_has_full_noise(self):
        model = companion_embed([0.5 * np.eye(3)])
        assert model.noise_dim is None
        np.testing.assert_array_equal(model.A, 0.5 * np.eye(3))


class TestSpectralStats:
    def test_diagonal(self):
        st = spectral_stats(np.diag([0.5, 0.2]))
        assert st.rho == pytest.approx(0.5)
        assert st.sigma_min == pytest.approx(0.2)
        assert st.sigma_max == pytest.approx(0.5)
        assert st.diagonalizable
        assert st.b_max == 1

    def test_jordan_block_flagged(self):
        st = spectral_stats(np.array([[1.0, 1.0], [0.0, 1.0]]))
        assert not st.diagonalizable
        assert st.cond_S is None
        with pytest.raises(ValueError):
            _ = st.b_max
        st2 = spectral_stats(np.array([[1.0, 1.0], [0.0, 1.0]]),
                             b_max_override=2)
        assert st2.b_max == 2

    def test_rotation(self):
        phi = 0.3
        A = np.array([[math.cos(phi), -math.sin(phi)],
                      [math.sin(phi), math.cos(phi)]])
        st = spectral_stats(A)
        assert st.rho == pytest.approx(1.0, abs=1e-12)
        assert st.sigma_min == pytest.approx(1.0, abs=1e-12)


class TestCsv:
    def test_roundtrip_exact(self):
        model = VarModel(A=0.9 * np.eye(3))
        path = simulate(model, 25, seed=9)
        buf = io.StringIO()
        save_path_csv(path, buf)
        buf.seek(0)
        back = load_path_csv(buf)
        np.testing.assert_array_equal(back.X, path.X)
        np.testing.assert_array_equal(back.Y, path.Y)

    def test_file_roundtrip(self, tmp_path):
        model = VarModel(A=np.zeros((2, 2)))
        path = simulate(model, 5, seed=0)
        f = tmp_path / "traj.csv"
        save_path_csv(path, f)
        header = f.read_text().splitlines()[0]
        assert header == "t,x_1,x_2"
        back = load_path_csv(f)
        np.testing.assert_array_equal(back.trajectory, path.trajectory)

    def test_rejects_malformed(self):
        with pytest.raises(ValueError):
            load_path_csv(io.StringIO("time,x_1\n1,0.0\n2,0.1\n"))
        with pytest.raises(ValueError):
            load_path_csv(io.StringIO("t,x_1\n1,0.0\n"))
