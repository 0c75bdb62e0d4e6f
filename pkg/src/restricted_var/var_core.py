"""VAR(1) models, innovation laws and trajectory simulation.

The process starts at X_0 = 0 and follows X_{t+1} = A X_t + eta_t with
i.i.d. innovations of per-coordinate variance sigma^2. Simulation is
deterministic given a seed; independent replications should use
distinct :class:`numpy.random.SeedSequence` spawn keys.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

# abort simulation once any coordinate exceeds this; keeps squared
# norms representable downstream
OVERFLOW_LIMIT = 1e150


class SimulationOverflowError(FloatingPointError):
    """Explosive trajectory exceeded the numeric guard."""

    def __init__(self, t: int, magnitude: float):
        self.t = t
        self.magnitude = magnitude
        super().__init__(
            f"trajectory overflow at step t={t}: max |X_t| = {magnitude:.3e}"
        )


@dataclass(frozen=True)
class NormalLaw:
    """Standard normal innovations (scaled by sigma)."""

    kind: str = field(default="normal", init=False)

    @property
    def density_bound(self) -> float:
        """Upper bound on the standardized one-dimensional projected density."""
        return 1.0 / math.sqrt(2.0 * math.pi)

    def sample(self, rng: np.random.Generator, n: int, d: int,
               sigma: float) -> np.ndarray:
        return sigma * rng.standard_normal((n, d))


@dataclass(frozen=True)
class ScaledStudentTLaw:
    """Multivariate t innovations rescaled to unit per-coordinate variance."""

    dof: float
    kind: str = field(default="student_t", init=False)

    def __post_init__(self):
        if self.dof <= 2:
            raise ValueError("Student-t dof must exceed 2 for finite variance")

    @property
    def density_bound(self) -> float:
        # 1-d marginal of multivariate t is t with the same dof; the
        # unit-variance rescaling multiplies the density by sqrt(dof/(dof-2))
        nu = self.dof
        f0 = math.gamma((nu + 1) / 2) / (math.sqrt(nu * math.pi) * math.gamma(nu / 2))
        return f0 * math.sqrt(nu / (nu - 2))

    def sample(self, rng: np.random.Generator, n: int, d: int,
               sigma: float) -> np.ndarray:
        nu = self.dof
        z = rng.standard_normal((n, d))
        w = rng.chisquare(nu, size=n) / nu
        t = z / np.sqrt(w)[:, None]
        return sigma * math.sqrt((nu - 2) / nu) * t


InnovationLaw = Union[NormalLaw, ScaledStudentTLaw]


@dataclass(frozen=True)
class VarModel:
    """A VAR(1) data generating process.

    ``noise_dim`` restricts the innovation support to the first
    ``noise_dim`` coordinates (companion form of a VAR(p)); ``None``
    means full support.
    """

    A: np.ndarray
    sigma2: float = 1.0
    law: InnovationLaw = NormalLaw()
    noise_dim: Optional[int] = None

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("A must be square")
        if self.sigma2 <= 0:
            raise ValueError("sigma2 must be positive")
        object.__setattr__(self, "A", A)

    @property
    def d(self) -> int:
        return self.A.shape[0]

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)


@dataclass(frozen=True)
class SpectralStats:
    rho: float
    sigma_min: float
    sigma_max: float
    diagonalizable: bool
    cond_S: Optional[float]
    b_max_override: Optional[int] = None

    @property
    def b_max(self) -> int:
        if self.b_max_override is not None:
            return self.b_max_override
        if self.diagonalizable:
            return 1
        raise ValueError(
            "A is numerically non-diagonalizable; supply b_max_override"
        )


@dataclass(frozen=True)
class SamplePath:
    """Design/response pair of a simulated or ingested trajectory.

    Rows of X are X_1..X_n, rows of Y are X_2..X_{n+1}.
    """

    X: np.ndarray
    Y: np.ndarray
    seed_info: Optional[str] = None

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        Y = np.asarray(self.Y, dtype=float)
        if X.shape != Y.shape:
            raise ValueError(f"X shape {X.shape} != Y shape {Y.shape}")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    @property
    def trajectory(self) -> np.ndarray:
        """X_1..X_{n+1} as an (n+1) x d array."""
        return np.vstack([self.X, self.Y[-1:]])


def simulate(model: VarModel, n: int,
             seed: Union[int, np.random.SeedSequence, np.random.Generator]) -> SamplePath:
    """Simulate X_1..X_{n+1} from X_0 = 0.

    Raises :class:`SimulationOverflowError` if the trajectory leaves
    the representable range (strongly explosive A at large n).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    d = model.d
    eta = model.law.sample(rng, n + 1, d, model.sigma)
    if model.noise_dim is not None:
        eta[:, model.noise_dim:] = 0.0
    traj = np.empty((n + 1, d))
    A = model.A
    x = np.zeros(d)
    for t in range(n + 1):
        x = A @ x + eta[t]
        m = np.max(np.abs(x))
        if not np.isfinite(m) or m > OVERFLOW_LIMIT:
            raise SimulationOverflowError(t + 1, float(m))
        traj[t] = x
    return SamplePath(X=traj[:n], Y=traj[1:], seed_info=repr(seed))


def make_dgp(which: int, d: int, *, k0: Optional[int] = None,
             K: Optional[int] = None, rho: Optional[float] = None,
             target_rho: Optional[float] = None,
             seed: Union[int, np.random.SeedSequence, None] = None,
             sigma2: float = 1.0, law: InnovationLaw = NormalLaw(),
             max_retries: int = 50) -> VarModel:
    """Build one of the three simulation designs.

    1: banded support with bandwidth k0; 2: grouped structure with K
    groups; 3: A = rho * I exactly. For 1 and 2, nonzero entries are
    U[-1, 1] draws rescaled so the spectral radius equals target_rho.
    """
    if which == 3:
        if rho is None:
            raise ValueError("DGP3 needs rho")
        return VarModel(A=rho * np.eye(d), sigma2=sigma2, law=law)

    if target_rho is None or target_rho <= 0:
        raise ValueError("DGP1/DGP2 need target_rho > 0")
    rng = np.random.default_rng(seed)
    for _ in range(max_retries):
        if which == 1:
            if k0 is None:
                raise ValueError("DGP1 needs k0")
            A = rng.uniform(-1.0, 1.0, size=(d, d))
            i, j = np.indices((d, d))
            A[np.abs(i - j) > k0] = 0.0
        elif which == 2:
            if K is None or d % K != 0:
                raise ValueError("DGP2 needs K dividing d")
            b = d // K
            A = np.zeros((d, d))
            for i in range(d):
                A[i, i] = rng.uniform(-1.0, 1.0)
                for k in range(K):
                    val = rng.uniform(-1.0, 1.0)
                    for j in range(k * b, (k + 1) * b):
                        if j != i:
                            A[i, j] = val
        else:
            raise ValueError(f"unknown DGP {which}")
        r = np.max(np.abs(np.linalg.eigvals(A)))
        if r > 1e-12:
            return VarModel(A=A * (target_rho / r), sigma2=sigma2, law=law)
    raise RuntimeError("degenerate draws: spectral radius kept vanishing")


def companion_embed(coeffs: list, *, sigma2: float = 1.0,
                    law: InnovationLaw = NormalLaw()) -> VarModel:
    """Embed VAR(p) coefficients A_1..A_p into the VAR(1) companion form.

    Innovations of the embedded model act on the first d0 coordinates
    only, recorded via ``noise_dim``.
    """
    coeffs = [np.atleast_2d(np.asarray(C, dtype=float)) for C in coeffs]
    p = len(coeffs)
    if p < 1:
        raise ValueError("need at least one coefficient matrix")
    d0 = coeffs[0].shape[0]
    for C in coeffs:
        if C.shape != (d0, d0):
            raise ValueError("all coefficient matrices must be d0 x d0")
    d = d0 * p
    A = np.zeros((d, d))
    A[:d0] = np.hstack(coeffs)
    for ell in range(1, p):
        A[ell * d0:(ell + 1) * d0, (ell - 1) * d0:ell * d0] = np.eye(d0)
    return VarModel(A=A, sigma2=sigma2, law=law,
                    noise_dim=d0 if p > 1 else None)


def spectral_stats(model: Union[VarModel, np.ndarray],
                   diag_cond_threshold: float = 1e8,
                   b_max_override: Optional[int] = None) -> SpectralStats:
    """Spectral radius, extreme singular values and diagonalizability.

    Diagonalizability is decided numerically: the eigenvector matrix
    condition number must stay below ``diag_cond_threshold``. Exact
    Jordan structure is never computed.
    """
    A = model.A if isinstance(model, VarModel) else np.asarray(model, dtype=float)
    eigvals, eigvecs = np.linalg.eig(A)
    rho = float(np.max(np.abs(eigvals)))
    svals = np.linalg.svd(A, compute_uv=False)
    cond_S = float(np.linalg.cond(eigvecs))
    diagonalizable = bool(np.isfinite(cond_S) and cond_S < diag_cond_threshold)
    return SpectralStats(
        rho=rho,
        sigma_min=float(svals[-1]),
        sigma_max=float(svals[0]),
        diagonalizable=diagonalizable,
        cond_S=cond_S if diagonalizable else None,
        b_max_override=b_max_override,
    )


# ---------------------------------------------------------------------------
# CSV interchange
# ---------------------------------------------------------------------------

def save_path_csv(path: SamplePath, file) -> None:
    """Write the trajectory as CSV with header t, x_1..x_d."""
    traj = path.trajectory
    d = traj.shape[1]

    def _write(fh):
        writer = csv.writer(fh)
        writer.writerow(["t"] + [f"x_{j + 1}" for j in range(d)])
        for t, row in enumerate(traj, start=1):
            writer.writerow([t] + [repr(float(v)) for v in row])

    if hasattr(file, "write"):
        _write(file)
    else:
        with open(file, "w", newline="") as fh:
            _write(fh)


def load_path_csv(file) -> SamplePath:
    """Read a trajectory CSV written by :func:`save_path_csv`."""
    def _read(fh):
        reader = csv.reader(fh)
        header = next(reader)
        if not header or header[0] != "t":
            raise ValueError("expected header starting with 't'")
        rows = sorted((int(r[0]), [float(v) for v in r[1:]]) for r in reader if r)
        return np.asarray([vals for _, vals in rows])

    if hasattr(file, "read"):
        traj = _read(file)
    else:
        with open(file, newline="") as fh:
            traj = _read(fh)
    if traj.shape[0] < 2:
        raise ValueError("trajectory needs at least 2 time points")
    return SamplePath(X=traj[:-1], Y=traj[1:])
