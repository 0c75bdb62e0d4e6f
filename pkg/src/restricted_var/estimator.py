"""Restricted ordinary least squares for VAR models.

The estimator solves min_theta ||ytilde - Z theta||^2 with
Z = (I_q kron X) R, but never materializes Z: the m x m Gram matrix is
accumulated as sum_i R_i^T (X^T X) R_i, so the cost scales with d and
m. A dense pseudoinverse oracle is provided for cross-checking.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .restrictions import RestrictionBasis
from .var_core import SamplePath, VarModel

# switch to the SVD pseudoinverse when the Gram matrix is worse
# conditioned than this
COND_LIMIT = 1e12

DENSE_ORACLE_MAX_ENTRIES = 10 ** 7


@dataclass(frozen=True)
class FitResult:
    theta_hat: np.ndarray
    beta_hat: np.ndarray
    A_hat: np.ndarray
    gram: np.ndarray
    rhs: np.ndarray
    rank_flag: bool  # True when the Gram matrix was numerically singular
    residual_sse: float

    def to_json(self) -> dict:
        return {
            "theta_hat": self.theta_hat.tolist(),
            "beta_hat": self.beta_hat.tolist(),
            "A_hat": self.A_hat.tolist(),
            "rank_flag": self.rank_flag,
            "residual_sse": self.residual_sse,
        }

    def to_json_str(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def _solve_spd(gram: np.ndarray, rhs: np.ndarray):
    """Solve gram @ theta = rhs; minimum-norm fallback when ill-conditioned."""
    if gram.shape[0] == 0:
        return np.zeros(0), False
    eigs = np.linalg.eigvalsh(gram)
    if eigs[0] <= 0 or eigs[-1] / eigs[0] > COND_LIMIT:
        return np.linalg.pinv(gram) @ rhs, True
    try:
        c = cho_factor(gram)
        return cho_solve(c, rhs), False
    except np.linalg.LinAlgError:
        return np.linalg.pinv(gram) @ rhs, True


def _row_block_supports(basis: RestrictionBasis):
    """Column supports of each row block; None unless pairwise disjoint."""
    supports = []
    seen = np.zeros(basis.m, dtype=bool)
    for i in range(basis.q):
        cols = np.flatnonzero(np.any(basis.block(i) != 0.0, axis=0))
        if np.any(seen[cols]):
            return None
        seen[cols] = True
        supports.append(cols)
    return supports


def _package(basis: RestrictionBasis, theta: np.ndarray, gram, rhs, rank_flag,
             sse: float) -> FitResult:
    beta = basis.R @ theta + basis.gamma
    A_hat = beta.reshape(basis.q, basis.d)
    return FitResult(
        theta_hat=theta,
        beta_hat=beta,
        A_hat=A_hat,
        gram=gram,
        rhs=rhs,
        rank_flag=rank_flag,
        residual_sse=float(sse),
    )


def fit(path: SamplePath, basis: RestrictionBasis) -> FitResult:
    """Restricted OLS via the Kronecker-structured normal equations.

    When the basis is per-row block diagonal (disjoint column supports,
    as in the banded case), the q small independent systems are solved
    separately instead of one m x m system.
    """
    X, Y = path.X, path.Y
    n, d = X.shape
    q = basis.q
    if basis.d != d or Y.shape[1] != q:
        raise ValueError(
            f"shape mismatch: basis is ({q},{d}), data is X {X.shape}, Y {Y.shape}"
        )
    if q * n < basis.m:
        raise ValueError(f"infeasible: qn = {q * n} < m = {basis.m}")

    G = X.T @ X
    m = basis.m
    gram = np.zeros((m, m))
    rhs = np.zeros(m)
    resid_vectors = []  # per-column adjusted responses, reused for SSE
    supports = _row_block_supports(basis)

    theta = np.zeros(m)
    rank_flag = False
    if supports is not None:
        for i in range(q):
            cols = supports[i]
            yi = Y[:, i] - X @ basis.gamma_block(i)
            resid_vectors.append(yi)
            if cols.size == 0:
                continue
            Ri = basis.block(i)[:, cols]
            gram_i = Ri.T @ G @ Ri
            rhs_i = Ri.T @ (X.T @ yi)
            gram[np.ix_(cols, cols)] = gram_i
            rhs[cols] = rhs_i
            theta_i, flag = _solve_spd(gram_i, rhs_i)
            theta[cols] = theta_i
            rank_flag = rank_flag or flag
    else:
        for i in range(q):
            Ri = basis.block(i)
            yi = Y[:, i] - X @ basis.gamma_block(i)
            resid_vectors.append(yi)
            gram += Ri.T @ G @ Ri
            rhs += Ri.T @ (X.T @ yi)
        theta, rank_flag = _solve_spd(gram, rhs)

    sse = 0.0
    for i in range(q):
        r = resid_vectors[i] - X @ (basis.block(i) @ theta)
        sse += float(r @ r)
    return _package(basis, theta, gram, rhs, rank_flag, sse)


def fit_dense_oracle(path: SamplePath, basis: RestrictionBasis) -> FitResult:
    """Brute-force OLS with Z = (I_q kron X) R materialized.

    Independent cross-check for :func:`fit`; guarded to small problems.
    """
    X, Y = path.X, path.Y
    n, d = X.shape
    q, m = basis.q, basis.m
    if q * n * max(m, 1) > DENSE_ORACLE_MAX_ENTRIES:
        raise ValueError(
            f"dense oracle guard: qn*m = {q * n * m} exceeds {DENSE_ORACLE_MAX_ENTRIES}"
        )
    Z = np.kron(np.eye(q), X) @ basis.R
    y = Y.flatten(order="F")  # vec(Y): column-major stacking
    ytilde = y - np.kron(np.eye(q), X) @ basis.gamma
    theta = np.linalg.pinv(Z) @ ytilde if m > 0 else np.zeros(0)
    resid = ytilde - Z @ theta
    gram = Z.T @ Z
    rank = np.linalg.matrix_rank(Z) if Z.size else 0
    return _package(basis, theta, gram, Z.T @ ytilde, rank < m, resid @ resid)


def estimation_error(fitted: Union[FitResult, np.ndarray],
                     truth: Union[VarModel, np.ndarray],
                     basis: RestrictionBasis = None) -> dict:
    """l2, Frobenius and spectral norms of the estimation error.

    The l2 norm of beta_hat - beta_* equals the Frobenius norm of
    A_hat - A_*; both are returned along with the spectral norm.
    """
    A_hat = fitted.A_hat if isinstance(fitted, FitResult) else np.asarray(fitted)
    A_star = truth.A if isinstance(truth, VarModel) else np.asarray(truth)
    if A_hat.shape != A_star.shape:
        raise ValueError(f"shape mismatch: {A_hat.shape} vs {A_star.shape}")
    diff = A_hat - A_star
    l2 = float(np.linalg.norm(diff.ravel()))
    fro = float(np.linalg.norm(diff, ord="fro"))
    assert abs(l2 - fro) <= 1e-12 * max(1.0, fro)
    return {
        "l2": l2,
        "fro": fro,
        "spec": float(np.linalg.norm(diff, ord=2)),
    }
