"""Finite-time error-bound machinery for restricted VAR estimation.

Evaluates all closed-form theoretical quantities: controllability
Gramians, small-ball thresholds, upper Gram matrices, the kappa and xi
quantities, the feasible block-size region, regime-dependent upper
bounds with the slow/fast phase classification, and the minimax lower
bounds including the closed-form KL divergence between trajectory laws.

All hidden universal constants are exposed in :class:`BoundConfig`
with default 1; the bounds are meant for regime and shape studies,
not certified coverage.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, asdict
from typing import Optional, Union

import numpy as np
from scipy.linalg import cho_factor, cho_solve, eigh

from .restrictions import RestrictionBasis
from .var_core import (
    NormalLaw,
    SpectralStats,
    VarModel,
    simulate,
    spectral_stats,
)

REGIMES = ("explosive", "stable1", "stable2")


class RegimeError(ValueError):
    """A bound was requested under an assumption the inputs do not meet."""


# ---------------------------------------------------------------------------
# Gramians
# ---------------------------------------------------------------------------

class GramianCache:
    """Incrementally computed finite-time controllability Gramians.

    Gamma_1 = I and Gamma_{t+1} = I + A Gamma_t A^T; the running matrix
    power is never formed explicitly. Entries are filled once per t and
    may be read concurrently afterwards.
    """

    def __init__(self, model: Union[VarModel, np.ndarray]):
        A = model.A if isinstance(model, VarModel) else np.asarray(model, dtype=float)
        self.A = A
        self.d = A.shape[0]
        self._gammas = {1: np.eye(self.d)}
        self._max_t = 1

    def gramian(self, t: int) -> np.ndarray:
        if t < 1:
            raise ValueError("t must be >= 1")
        while self._max_t < t:
            prev = self._gammas[self._max_t]
            with np.errstate(over="ignore", invalid="ignore"):
                nxt = np.eye(self.d) + self.A @ prev @ self.A.T
                nxt = 0.5 * (nxt + nxt.T)
            if not np.all(np.isfinite(nxt)):
                raise OverflowError(
                    f"Gramian overflow at t={self._max_t + 1}: explosive A at large t"
                )
            self._max_t += 1
            self._gammas[self._max_t] = nxt
        return self._gammas[t]

    def gramian_sum(self, n: int) -> np.ndarray:
        """sum_{t=1}^{n} Gamma_t."""
        self.gramian(n)
        out = np.zeros((self.d, self.d))
        for t in range(1, n + 1):
            out += self._gammas[t]
        return out


def gramian(model: Union[VarModel, np.ndarray], t: int) -> np.ndarray:
    """Gamma_t = sum_{s<t} A^s (A^T)^s, via the recurrence."""
    return GramianCache(model).gramian(t)


def geometric_gramian_scalar(rho: float, t: int) -> float:
    """gamma_t(rho) = sum_{s<t} rho^(2s)."""
    if abs(rho) == 1.0:
        return float(t)
    r2 = rho * rho
    return (1.0 - r2 ** t) / (1.0 - r2)


# ---------------------------------------------------------------------------
# Configuration and report types
# ---------------------------------------------------------------------------

@dataclass
class BoundConfig:
    """Constants and regime selection for the bound formulas."""

    delta: float = 0.05
    alpha: float = 0.1  # small-ball probability
    C0: float = 1.0 / math.sqrt(2.0 * math.pi)  # innovation density bound
    C1: float = 1.0  # Hanson-Wright universal constant in psi
    c_explosive: float = 1.0  # the c in rho <= 1 + c/n
    c1_phase: float = 1.0  # phase-transition constant
    c_k: float = 1.0  # multiplicative constant of the feasible-k ceiling
    c_rate: float = 1.0  # leading constant of the rate formulas
    regime: str = "stable1"
    b_max: Optional[int] = None
    cond_S: Optional[float] = None

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0,1)")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0,1)")
        for name in ("C0", "C1", "c_explosive", "c1_phase", "c_k", "c_rate"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.regime not in REGIMES:
            raise ValueError(f"regime must be one of {REGIMES}")

    def spectral_inputs(self, stats: SpectralStats) -> tuple:
        """(b_max, cond_S), preferring explicit overrides."""
        b_max = self.b_max
        if b_max is None:
            b_max = stats.b_max
        cond_S = self.cond_S
        if cond_S is None:
            cond_S = stats.cond_S if stats.cond_S is not None else 1.0
        return b_max, cond_S


@dataclass
class BoundReport:
    regime: str
    phase: str
    phase_threshold: float
    sigma_min: float
    rho: float
    m: int
    d: int
    n: int
    k_max_feasible: int
    lambda_max_gamma_Rk: float
    kappa: float
    xi: float
    logdet_ratio: float
    thm1_bound: float
    thm1_condition_ok: bool
    n_required_thm1: float
    thm2_bound: float
    thm3_bound: float
    lower_bound: float
    lower_regime: str

    def to_json_str(self) -> str:
        return json.dumps(asdict(self), indent=2)


# ---------------------------------------------------------------------------
# Core quantities
# ---------------------------------------------------------------------------

def inner_gram(basis: RestrictionBasis, Gamma: np.ndarray) -> np.ndarray:
    """R^T (I_d kron Gamma) R = sum_i R_i^T Gamma R_i (m x m)."""
    m = basis.m
    out = np.zeros((m, m))
    for Ri in basis.blocks():
        out += Ri.T @ Gamma @ Ri
    return 0.5 * (out + out.T)


def gamma_Rk(basis: RestrictionBasis, gramians: GramianCache, k: int) -> dict:
    """Gamma_{R,k} = R {R^T (I_d kron Gamma_k) R}^{-1} R^T and its top eigenvalue.

    The eigenvalue is computed from the m x m generalized problem
    (same nonzero spectrum), never from the N x N matrix.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    M = inner_gram(basis, gramians.gramian(k))
    W = basis.R.T @ basis.R
    eigs = eigh(W, M, eigvals_only=True)
    try:
        c = cho_factor(M)
        matrix = basis.R @ cho_solve(c, basis.R.T)
    except np.linalg.LinAlgError as exc:
        raise RegimeError(f"singular inner matrix R^T(I kron Gamma_k)R: {exc}")
    return {"matrix": 0.5 * (matrix + matrix.T), "lambda_max": float(eigs[-1])}


def bmsb_threshold(model: VarModel, k: int, config: BoundConfig) -> np.ndarray:
    """Small-ball threshold matrix sigma^2 Gamma_k / (4 C0)^2."""
    return model.sigma2 * gramian(model, k) / (4.0 * config.C0) ** 2


def empirical_bmsb(model: VarModel, k: int, omega: np.ndarray, reps: int,
                   seed=0, config: Optional[BoundConfig] = None) -> dict:
    """Monte Carlo check of the block small-ball condition at s = 0.

    Estimates (2k)^{-1} sum_{t=1}^{2k} pr(|omega^T X_t| >= threshold)
    and its standard error; the estimate should exceed 1/10 up to
    Monte Carlo noise.
    """
    if reps < 1000:
        raise ValueError("reps must be >= 1000 for a stable estimate")
    config = config or BoundConfig()
    omega = np.asarray(omega, dtype=float).ravel()
    omega = omega / np.linalg.norm(omega)
    Gsb = bmsb_threshold(model, k, config)
    thr = math.sqrt(float(omega @ Gsb @ omega))
    ss = np.random.SeedSequence(seed)
    fractions = np.empty(reps)
    for r, child in enumerate(ss.spawn(reps)):
        path = simulate(model, 2 * k, child)
        proj = np.abs(path.trajectory[: 2 * k] @ omega)
        fractions[r] = np.mean(proj >= thr)
    est = float(np.mean(fractions))
    se = float(np.std(fractions, ddof=1) / math.sqrt(reps))
    return {"estimate": est, "stderr": se, "threshold": thr}


def upper_gram_choice(model: VarModel, basis: RestrictionBasis, n: int,
                      config: BoundConfig) -> dict:
    """Select and evaluate the upper Gram matrix (m x m inner form).

    The sharper Hanson-Wright variant applies only in the strongly
    stable regime with normal innovations; otherwise the Markov-bound
    variant is used.
    """
    use_second = config.regime == "stable2" and isinstance(model.law, NormalLaw)
    cache = GramianCache(model)
    base = inner_gram(basis, cache.gramian(n))
    if use_second:
        x = xi(model, basis.m, n, config, cache=cache)
        matrix = model.sigma2 * base + model.sigma2 * x * (basis.R.T @ basis.R)
        return {"matrix": matrix, "which": "markov+hanson-wright", "variant": 2}
    matrix = model.sigma2 * basis.m * base / config.delta
    return {"matrix": matrix, "which": "markov", "variant": 1}


def _sym_slogdet(M: np.ndarray) -> float:
    """log det of a PSD matrix via Cholesky, with a symmetrize retry."""
    M = np.asarray(M)
    for candidate in (M, 0.5 * (M + M.T)):
        try:
            L = np.linalg.cholesky(candidate)
            return float(2.0 * np.sum(np.log(np.diag(L))))
        except np.linalg.LinAlgError:
            continue
    raise RegimeError("matrix is not positive definite up to roundoff")


def kappa(basis: RestrictionBasis, gramians: GramianCache, n: int) -> float:
    """kappa = log det{R^T (I_d kron Gamma_n) R (R^T R)^{-1}}."""
    if n < 1:
        raise ValueError("n must be >= 1")
    M = inner_gram(basis, gramians.gramian(n))
    W = basis.R.T @ basis.R
    return _sym_slogdet(M) - _sym_slogdet(W)


# ---------------------------------------------------------------------------
# ||Sigma_X||_2, matrix free
# ---------------------------------------------------------------------------

def _sigma_x_matvec(cache: GramianCache, sigma2: float, V: np.ndarray) -> np.ndarray:
    """Apply Sigma_X to vec(X^T)-ordered v, given as an n x d array.

    Block (t,s) of Sigma_X is sigma^2 A^{t-s} Gamma_s for t >= s and
    the transpose relation above the diagonal. Both halves reduce to
    first-order recursions, O(n d^2) total.
    """
    n, d = V.shape
    A = cache.A
    out = np.empty_like(V)
    # lower part: L_t = A L_{t-1} + Gamma_t v_t
    L = np.zeros(d)
    for t in range(n):
        L = A @ L + cache.gramian(t + 1) @ V[t]
        out[t] = L
    # upper part: M_t = A^T (v_{t+1} + M_{t+1}); contribution Gamma_t M_t
    M = np.zeros(d)
    for t in range(n - 1, -1, -1):
        out[t] += cache.gramian(t + 1) @ M
        M = A.T @ (V[t] + M)
    return sigma2 * out


def sigma_x_norm_dense(model: VarModel, n: int) -> float:
    """||Sigma_X||_2 by materializing the dn x dn covariance (oracle)."""
    d = model.d
    if d * n > 4000:
        raise ValueError(f"dense Sigma_X guard: dn = {d * n} > 4000")
    cache = GramianCache(model)
    S = np.zeros((d * n, d * n))
    powers = [np.eye(d)]
    for _ in range(n - 1):
        powers.append(model.A @ powers[-1])
    for t in range(n):
        for s in range(t + 1):
            block = model.sigma2 * powers[t - s] @ cache.gramian(s + 1)
            S[t * d:(t + 1) * d, s * d:(s + 1) * d] = block
            if s != t:
                S[s * d:(s + 1) * d, t * d:(t + 1) * d] = block.T
    return float(np.max(np.linalg.eigvalsh(0.5 * (S + S.T))))


def sigma_x_norm(model: VarModel, n: int, *, tol: float = 1e-9,
                 max_iter: int = 1000,
                 cache: Optional[GramianCache] = None) -> float:
    """||Sigma_X||_2 via matrix-free Lanczos iteration on the block operator.

    The covariance is only ever applied through the O(n d^2) recursion;
    Lanczos handles the clustered top eigenvalues that defeat plain
    power iteration for near-diagonal A. Small problems fall back to
    the dense eigenvalue solver if the iteration stalls.
    """
    from scipy.sparse.linalg import ArpackError, ArpackNoConvergence
    from scipy.sparse.linalg import LinearOperator, eigsh

    cache = cache or GramianCache(model)
    d = model.d
    dim = n * d
    if dim < 4:
        return sigma_x_norm_dense(model, n)

    def matvec(v):
        return _sigma_x_matvec(cache, model.sigma2,
                               np.asarray(v, dtype=float).reshape(n, d)).ravel()

    op = LinearOperator((dim, dim), matvec=matvec, dtype=float)
    rng = np.random.default_rng(0)
    try:
        vals = eigsh(op, k=1, which="LA", tol=tol,
                     maxiter=max_iter * dim, v0=rng.standard_normal(dim),
                     return_eigenvectors=False)
        return float(vals[0])
    except (ArpackError, ArpackNoConvergence):
        if dim <= 4000:
            return sigma_x_norm_dense(model, n)
        raise RuntimeError(
            f"Lanczos iteration did not converge (dn = {dim})"
        )


def psi(m: int, d: int, delta: float, C1: float = 1.0) -> float:
    """psi(m, d, delta) = C1 {m log 9 + log d + log(2/delta)}."""
    return C1 * (m * math.log(9.0) + math.log(d) + math.log(2.0 / delta))


def xi(model: VarModel, m: int, n: int, config: BoundConfig, *,
       cache: Optional[GramianCache] = None) -> float:
    """The Hanson-Wright slack term entering the second upper Gram matrix."""
    cache = cache or GramianCache(model)
    p = psi(m, model.d, config.delta, config.C1)
    lam_n = float(np.max(np.linalg.eigvalsh(cache.gramian(n))))
    ratio = sigma_x_norm(model, n, cache=cache) / (model.sigma2 * n)
    return 2.0 * math.sqrt(lam_n * p * ratio) + 2.0 * p * ratio


# ---------------------------------------------------------------------------
# Regime numerators, feasible k, phase classification
# ---------------------------------------------------------------------------

def _rate_numerator(regime: str, m: int, d: int, n: int, delta: float,
                    b_max: int, cond_S: float) -> float:
    """Numerator of the upper-bound rate (also the thm2 numerator)."""
    if regime == "explosive":
        return m * (math.log(d * cond_S / delta) + b_max * math.log(n))
    if regime == "stable1":
        return m * math.log(m / delta)
    if regime == "stable2":
        return m + math.log(1.0 / delta)
    raise RegimeError(f"unknown regime {regime}")


def _k_denominator(regime: str, m: int, d: int, n: int, delta: float,
                   b_max: int, cond_S: float) -> float:
    if regime == "explosive":
        return m * (math.log(d * cond_S / delta) + b_max * math.log(n))
    if regime == "stable1":
        return m * math.log(m / delta) + math.log(d)
    if regime == "stable2":
        return m + math.log(d / delta)
    raise RegimeError(f"unknown regime {regime}")


def _phase_numerator(regime: str, m: int, d: int, n: int, delta: float,
                     b_max: int, cond_S: float) -> float:
    """Numerator of the phase-transition threshold (and of the fast rate)."""
    if regime == "explosive":
        return m * (math.log(d * cond_S / delta) + b_max * math.log(n))
    if regime == "stable1":
        return m * math.log(m / delta) + math.log(d)
    if regime == "stable2":
        return m + math.log(d / delta)
    raise RegimeError(f"unknown regime {regime}")


def _check_regime_prereqs(model: VarModel, config: BoundConfig, n: int,
                          stats: SpectralStats) -> None:
    if config.regime == "stable2" and not isinstance(model.law, NormalLaw):
        raise RegimeError(
            "the strongly stable regime requires normal innovations"
        )
    if config.regime in ("stable1", "stable2") and stats.rho >= 1.0:
        raise RegimeError(
            f"stable regime requested but rho(A) = {stats.rho:.6g} >= 1"
        )
    if config.regime == "explosive" and stats.rho > 1.0 + config.c_explosive / n:
        raise RegimeError(
            f"rho(A) = {stats.rho:.6g} exceeds 1 + c/n = {1 + config.c_explosive / n:.6g}"
        )


def feasible_k(model: VarModel, basis_m: Union[RestrictionBasis, int], n: int,
               config: BoundConfig,
               stats: Optional[SpectralStats] = None) -> int:
    """Largest block size k consistent with the sample-size condition.

    The regime-specific ceiling c*n/denominator is intersected with
    k <= floor(n/2); the result is at least 1.
    """
    m = basis_m.m if isinstance(basis_m, RestrictionBasis) else int(basis_m)
    stats = stats or spectral_stats(model)
    b_max, cond_S = config.spectral_inputs(stats)
    denom = _k_denominator(config.regime, m, model.d, n, config.delta, b_max, cond_S)
    ceiling = config.c_k * n / denom
    return max(1, min(int(math.floor(ceiling)), n // 2))


def classify_phase(model: VarModel, m: int, d: int, n: int,
                   config: BoundConfig,
                   stats: Optional[SpectralStats] = None) -> dict:
    """Slow/fast phase from sigma_min(A) against the regime threshold."""
    stats = stats or spectral_stats(model)
    b_max, cond_S = config.spectral_inputs(stats)
    numer = _phase_numerator(config.regime, m, d, n, config.delta, b_max, cond_S)
    threshold = 1.0 - config.c1_phase * numer / n
    phase = "slow" if stats.sigma_min <= threshold else "fast"
    return {"phase": phase, "threshold": threshold, "sigma_min": stats.sigma_min}


# ---------------------------------------------------------------------------
# Upper bounds
# ---------------------------------------------------------------------------

def thm1_condition_rhs(m: int, q: int, k: int, alpha: float, delta: float,
                       logdet_ratio: float) -> float:
    """Minimal n required by the general upper bound."""
    return (9.0 * k / alpha ** 2) * (
        m * math.log(27.0 / alpha)
        + 0.5 * logdet_ratio
        + math.log(q)
        + math.log(1.0 / delta)
    )


def thm1_bound(*, m: int, n: int, k: int, alpha: float, sigma: float,
               delta: float, lambda_max_scale: float, logdet_ratio: float,
               q: int = 1) -> dict:
    """Literal evaluation of the general high-probability upper bound.

    ``lambda_max_scale`` is lambda_max(R Gammalower_R^{-1} R^T) (or the
    spectral-norm variant). The sample-size condition is checked and
    reported; the bound value is returned either way.
    """
    inner = (
        12.0 * m * math.log(14.0 / alpha)
        + 9.0 * logdet_ratio
        + 6.0 * math.log(1.0 / delta)
    )
    value = (9.0 * sigma / alpha) * math.sqrt(lambda_max_scale / n * inner)
    n_req = thm1_condition_rhs(m, q, k, alpha, delta, logdet_ratio)
    return {"value": value, "condition_ok": n >= n_req, "n_required": n_req}


def lower_gram(model: VarModel, basis: RestrictionBasis, k: int,
               config: BoundConfig,
               cache: Optional[GramianCache] = None) -> np.ndarray:
    """Gammalower_R = sigma^2 R^T (I_d kron Gamma_k) R / (4 C0)^2 (m x m)."""
    cache = cache or GramianCache(model)
    return model.sigma2 * inner_gram(basis, cache.gramian(k)) / (4.0 * config.C0) ** 2


def logdet_ratio(upper: np.ndarray, lower: np.ndarray) -> float:
    """log det(upper_R lower_R^{-1}) from the two m x m inner matrices."""
    return _sym_slogdet(upper) - _sym_slogdet(lower)


def _lambda_max_scale_l2(basis: RestrictionBasis, lower: np.ndarray) -> float:
    """lambda_max(R lower^{-1} R^T) via the generalized m x m problem."""
    W = basis.R.T @ basis.R
    return float(eigh(W, lower, eigvals_only=True)[-1])


def _lambda_max_scale_spec(basis: RestrictionBasis, lower: np.ndarray) -> float:
    """lambda_max(sum_i R_i lower^{-1} R_i^T), the spectral-norm variant."""
    c = cho_factor(lower)
    S = np.zeros((basis.d, basis.d))
    for Ri in basis.blocks():
        S += Ri @ cho_solve(c, Ri.T)
    return float(np.max(np.linalg.eigvalsh(0.5 * (S + S.T))))


def thm1_bound_for_model(model: VarModel, basis: RestrictionBasis, n: int,
                         config: BoundConfig, *, norm: str = "l2",
                         k: Optional[int] = None,
                         stats: Optional[SpectralStats] = None) -> dict:
    """Assemble the general upper bound for a VAR model end to end."""
    stats = stats or spectral_stats(model)
    _check_regime_prereqs(model, config, n, stats)
    if k is None:
        k = feasible_k(model, basis, n, config, stats)
    cache = GramianCache(model)
    lower = lower_gram(model, basis, k, config, cache)
    upper = upper_gram_choice(model, basis, n, config)["matrix"]
    ratio = logdet_ratio(upper, lower)
    if norm == "l2":
        scale = _lambda_max_scale_l2(basis, lower)
    elif norm == "spec":
        scale = _lambda_max_scale_spec(basis, lower)
    else:
        raise ValueError("norm must be 'l2' or 'spec'")
    out = thm1_bound(
        m=basis.m, n=n, k=k, alpha=config.alpha, sigma=model.sigma,
        delta=config.delta, lambda_max_scale=scale, logdet_ratio=ratio,
        q=basis.q,
    )
    out.update({"k": k, "logdet_ratio": ratio, "lambda_max_scale": scale})
    return out


def thm2_bound(model: VarModel, basis: RestrictionBasis, n: int,
               config: BoundConfig,
               stats: Optional[SpectralStats] = None) -> dict:
    """Regime-dependent rate with the restriction scale factor.

    Evaluated at the maximal feasible block size; the hidden universal
    constant is exposed as ``config.c_rate``.
    """
    stats = stats or spectral_stats(model)
    _check_regime_prereqs(model, config, n, stats)
    k = feasible_k(model, basis, n, config, stats)
    lam = gamma_Rk(basis, GramianCache(model), k)["lambda_max"]
    b_max, cond_S = config.spectral_inputs(stats)
    numer = _rate_numerator(config.regime, basis.m, model.d, n, config.delta,
                            b_max, cond_S)
    value = config.c_rate * math.sqrt(lam * numer / n)
    return {"value": value, "regime": config.regime, "k": k, "lambda_max": lam}


def thm3_bound(model: VarModel, m: int, d: int, n: int, config: BoundConfig,
               stats: Optional[SpectralStats] = None) -> dict:
    """Phase-resolved rate: slow carries the 1 - sigma_min^2 factor."""
    stats = stats or spectral_stats(model)
    _check_regime_prereqs(model, config, n, stats)
    b_max, cond_S = config.spectral_inputs(stats)
    cls = classify_phase(model, m, d, n, config, stats)
    if cls["phase"] == "slow":
        numer = _rate_numerator(config.regime, m, d, n, config.delta,
                                b_max, cond_S)
        value = config.c_rate * math.sqrt(
            (1.0 - stats.sigma_min ** 2) * numer / n
        )
    else:
        numer = _phase_numerator(config.regime, m, d, n, config.delta,
                                 b_max, cond_S)
        value = config.c_rate * numer / n
    return {"value": value, "phase": cls["phase"],
            "threshold": cls["threshold"], "regime": config.regime}


# ---------------------------------------------------------------------------
# Lower bounds
# ---------------------------------------------------------------------------

def kl_divergence(theta: np.ndarray, theta0: np.ndarray,
                  basis: RestrictionBasis, n: int) -> float:
    """Closed-form KL divergence between trajectory laws at theta and theta0.

    Valid for normal innovations; the Gramians are evaluated at
    A(theta), and sigma^2 cancels.
    """
    theta = np.asarray(theta, dtype=float).ravel()
    theta0 = np.asarray(theta0, dtype=float).ravel()
    A_theta = basis.coefficient_matrix(theta)
    if A_theta.shape[0] != A_theta.shape[1]:
        raise ValueError("KL divergence needs a square VAR basis (q = d)")
    cache = GramianCache(A_theta)
    S = cache.gramian_sum(n)
    M = inner_gram(basis, S)
    diff = theta - theta0
    return float(0.5 * diff @ M @ diff)


def minimax_lower(m: int, n: int, rho_bar: float, delta: float,
                  c: float = 1.0) -> dict:
    """Minimax rate over the restricted class with spectral radius <= rho_bar.

    Returns the regime label, the rate with leading constant 1, the
    geometric Gramian scalar gamma_n(rho_bar), and the largest epsilon
    for which the sample-size feasibility check holds.
    """
    if rho_bar <= 0:
        raise ValueError("rho_bar must be positive")
    if not 0 < delta < 0.25:
        raise ValueError("delta must lie in (0, 1/4)")
    boundary_low = math.sqrt(1.0 - 1.0 / n)
    boundary_high = 1.0 + c / n
    if rho_bar < boundary_low:
        regime = "i"
        rate = math.sqrt((1.0 - rho_bar ** 2) * m / n)
    elif rho_bar <= boundary_high:
        regime = "ii"
        rate = math.sqrt(m) / n
    else:
        regime = "iii"
        rate = rho_bar ** (-n) * math.sqrt((rho_bar ** 2 - 1.0) * m / n)
    gamma_n = geometric_gramian_scalar(rho_bar, n)
    eps_max = math.sqrt((m + math.log(1.0 / delta)) / (n * gamma_n))
    return {
        "rate": rate,
        "regime": regime,
        "gamma_n": gamma_n,
        "eps_feasible_max": min(eps_max, rho_bar / 4.0),
    }


def mu_min_diagnostic(A: np.ndarray, grid: int = 512) -> float:
    """min over |z| = 1 of lambda_min(A*(z) A(z)) with A(z) = I - A z.

    Diagnostic for the strongly stable assumption; evaluated on a
    unit-circle grid, not consumed by any bound.
    """
    A = np.asarray(A, dtype=float)
    d = A.shape[0]
    best = math.inf
    for phi in np.linspace(0.0, 2.0 * math.pi, grid, endpoint=False):
        z = complex(math.cos(phi), math.sin(phi))
        Az = np.eye(d) - A * z
        lam = float(np.min(np.linalg.eigvalsh(Az.conj().T @ Az)).real)
        best = min(best, lam)
    return best


# ---------------------------------------------------------------------------
# Full report
# ---------------------------------------------------------------------------

def bound_report(model: VarModel, basis: RestrictionBasis, n: int,
                 config: BoundConfig,
                 rho_bar: Optional[float] = None) -> BoundReport:
    """Evaluate the full bound stack for one (model, basis, n) triple."""
    stats = spectral_stats(model)
    _check_regime_prereqs(model, config, n, stats)
    cache = GramianCache(model)
    k = feasible_k(model, basis, n, config, stats)
    grk = gamma_Rk(basis, cache, k)
    kap = kappa(basis, cache, n)
    x = xi(model, basis.m, n, config, cache=cache)
    t1 = thm1_bound_for_model(model, basis, n, config, k=k, stats=stats)
    t2 = thm2_bound(model, basis, n, config, stats=stats)
    t3 = thm3_bound(model, basis.m, model.d, n, config, stats=stats)
    low = minimax_lower(basis.m, n, rho_bar if rho_bar is not None else stats.rho,
                        min(config.delta, 0.2499))
    return BoundReport(
        regime=config.regime,
        phase=t3["phase"],
        phase_threshold=t3["threshold"],
        sigma_min=stats.sigma_min,
        rho=stats.rho,
        m=basis.m,
        d=model.d,
        n=n,
        k_max_feasible=k,
        lambda_max_gamma_Rk=grk["lambda_max"],
        kappa=kap,
        xi=x,
        logdet_ratio=t1["logdet_ratio"],
        thm1_bound=t1["value"],
        thm1_condition_ok=t1["condition_ok"],
        n_required_thm1=t1["n_required"],
        thm2_bound=t2["value"],
        thm3_bound=t3["value"],
        lower_bound=low["rate"],
        lower_regime=low["regime"],
    )
