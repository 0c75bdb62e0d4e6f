"""Linear restrictions on VAR coefficient matrices.

Two equivalent encodings of affine restrictions on the parameter vector
beta = vec(A^T) (row-wise stacking of A, length N = q*d):

* constraint form: C beta = mu, with C of shape (N-m) x N and rank N-m;
* basis form: beta = R theta + gamma, with R of shape N x m and full
  column rank.

Builders are provided for the common restriction patterns: banded,
network, grouped, scaled identity, VAR(p) companion embedding and
fully custom zero/equality/fixed-value specifications.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from scipy.linalg import null_space


class RestrictionError(ValueError):
    """Invalid restriction specification or rank-deficient encoding."""


def _numerical_rank(M: np.ndarray) -> int:
    if M.size == 0:
        return 0
    nonzero = M != 0
    if np.all(np.count_nonzero(nonzero, axis=1) <= 1):
        # disjoint column supports: rank is the number of nonzero columns
        return int(np.sum(np.any(nonzero, axis=0)))
    s = np.linalg.svd(M, compute_uv=False)
    tol = max(M.shape) * np.finfo(float).eps * s[0] if s.size else 0.0
    return int(np.sum(s > tol))


@dataclass(frozen=True)
class ConstraintForm:
    """Restrictions as C beta = mu with C of full row rank."""

    C: np.ndarray
    mu: np.ndarray

    def __post_init__(self):
        C = np.atleast_2d(np.asarray(self.C, dtype=float))
        mu = np.asarray(self.mu, dtype=float).ravel()
        if C.shape[0] != mu.shape[0]:
            raise RestrictionError(
                f"C has {C.shape[0]} rows but mu has length {mu.shape[0]}"
            )
        r = _numerical_rank(C)
        if r != C.shape[0]:
            raise RestrictionError(
                f"C is rank deficient: effective rank {r} < {C.shape[0]} rows"
            )
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "mu", mu)

    @property
    def N(self) -> int:
        return self.C.shape[1]

    @property
    def m(self) -> int:
        return self.N - self.C.shape[0]


@dataclass(frozen=True)
class RestrictionBasis:
    """Restrictions as the affine space {R theta + gamma}.

    ``q`` and ``d`` fix the block partition: R stacks q row blocks of
    shape d x m, and gamma stacks q slices of length d.
    """

    R: np.ndarray
    gamma: np.ndarray
    q: int
    d: int

    def __post_init__(self):
        R = np.asarray(self.R, dtype=float)
        if R.ndim != 2:
            R = R.reshape(-1, 1)
        gamma = np.asarray(self.gamma, dtype=float).ravel()
        N = self.q * self.d
        if R.shape[0] != N or gamma.shape[0] != N:
            raise RestrictionError(
                f"R/gamma length {R.shape[0]}/{gamma.shape[0]} != q*d = {N}"
            )
        if R.shape[1] > 0 and _numerical_rank(R) != R.shape[1]:
            raise RestrictionError("R is column rank deficient")
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "gamma", gamma)

    @property
    def N(self) -> int:
        return self.q * self.d

    @property
    def m(self) -> int:
        return self.R.shape[1]

    def block(self, i: int) -> np.ndarray:
        """The d x m row block R_i."""
        return self.R[i * self.d : (i + 1) * self.d]

    def gamma_block(self, i: int) -> np.ndarray:
        return self.gamma[i * self.d : (i + 1) * self.d]

    def blocks(self):
        for i in range(self.q):
            yield self.block(i)

    def coefficient_matrix(self, theta: np.ndarray) -> np.ndarray:
        """A(theta): the q x d matrix with beta = R theta + gamma."""
        beta = self.R @ np.asarray(theta, dtype=float).ravel() + self.gamma
        return beta.reshape(self.q, self.d)


# ---------------------------------------------------------------------------
# Restriction patterns (tagged union)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Unrestricted:
    d: int
    kind: str = field(default="unrestricted", init=False)


@dataclass(frozen=True)
class Banded:
    d: int
    k0: int
    kind: str = field(default="banded", init=False)

    def __post_init__(self):
        if not 1 <= self.k0 <= (self.d - 1) // 2:
            raise RestrictionError(
                f"bandwidth k0={self.k0} outside [1, {(self.d - 1) // 2}] for d={self.d}"
            )

    @property
    def m(self) -> int:
        return self.d + (2 * self.d - 1) * self.k0 - self.k0 ** 2


@dataclass(frozen=True)
class Network:
    d: int
    adjacency: np.ndarray
    kind: str = field(default="network", init=False)

    def __post_init__(self):
        adj = np.asarray(self.adjacency, dtype=bool)
        if adj.shape != (self.d, self.d):
            raise RestrictionError(f"adjacency must be {self.d}x{self.d}")
        if np.any(np.diag(adj)):
            raise RestrictionError("adjacency must have a zero diagonal")
        if not adj.any():
            raise RestrictionError("network pattern needs at least one edge")
        object.__setattr__(self, "adjacency", adj)


@dataclass(frozen=True)
class Grouped:
    d: int
    K: int
    kind: str = field(default="grouped", init=False)

    def __post_init__(self):
        if self.d % self.K != 0:
            raise RestrictionError(f"K={self.K} does not divide d={self.d}")
        if self.d // self.K < 2:
            raise RestrictionError("group size must be >= 2 for full-rank R")

    @property
    def m(self) -> int:
        return (self.K + 1) * self.d


@dataclass(frozen=True)
class ScaledIdentity:
    d: int
    kind: str = field(default="scaled_identity", init=False)


@dataclass(frozen=True)
class Custom:
    """Explicit zero set, equality classes and fixed values.

    Indices are 0-based into beta = vec(A^T), i.e. entry (i, j) of the
    q x d coefficient matrix maps to index i*d + j.
    """

    zero_set: tuple
    equality_classes: tuple
    fixed_values: tuple  # tuple of (index, value) pairs
    d: Optional[int] = None  # square shape, when the pattern stands alone
    kind: str = field(default="custom", init=False)

    def __post_init__(self):
        zs = tuple(int(i) for i in self.zero_set)
        ec = tuple(tuple(int(i) for i in cls) for cls in self.equality_classes)
        fv = tuple((int(i), float(v)) for i, v in self.fixed_values)
        seen: set = set()
        for group in (zs, [i for c in ec for i in c], [i for i, _ in fv]):
            for i in group:
                if i in seen:
                    raise RestrictionError(f"index {i} appears in multiple roles")
                seen.add(i)
        for cls in ec:
            if len(cls) < 2:
                raise RestrictionError("equality classes need at least 2 members")
        object.__setattr__(self, "zero_set", zs)
        object.__setattr__(self, "equality_classes", ec)
        object.__setattr__(self, "fixed_values", fv)


@dataclass(frozen=True)
class CompanionVarP:
    """VAR(p) companion-form pattern on the d0*p-dimensional VAR(1).

    Rows below the first block row are fixed to the identity
    sub-diagonal and zeros, encoded entirely in gamma. ``inner``, if
    given, restricts each of the p lag-coefficient blocks; ``None``
    leaves the first block row unrestricted.
    """

    d0: int
    p: int
    inner: Optional["RestrictionPattern"] = None
    kind: str = field(default="companion_var_p", init=False)

    def __post_init__(self):
        if self.p < 1:
            raise RestrictionError("p must be >= 1")


RestrictionPattern = Union[
    Unrestricted, Banded, Network, Grouped, ScaledIdentity, Custom, CompanionVarP
]


# ---------------------------------------------------------------------------
# JSON (de)serialization of patterns
# ---------------------------------------------------------------------------

def pattern_to_json(pattern: RestrictionPattern) -> dict:
    if isinstance(pattern, Unrestricted):
        return {"kind": "unrestricted", "d": pattern.d}
    if isinstance(pattern, Banded):
        return {"kind": "banded", "d": pattern.d, "k0": pattern.k0}
    if isinstance(pattern, Network):
        return {
            "kind": "network",
            "d": pattern.d,
            "adjacency": pattern.adjacency.astype(int).tolist(),
        }
    if isinstance(pattern, Grouped):
        return {"kind": "grouped", "d": pattern.d, "K": pattern.K}
    if isinstance(pattern, ScaledIdentity):
        return {"kind": "scaled_identity", "d": pattern.d}
    if isinstance(pattern, Custom):
        out = {
            "kind": "custom",
            "zero_set": list(pattern.zero_set),
            "equality_classes": [list(c) for c in pattern.equality_classes],
            "fixed_values": {str(i): v for i, v in pattern.fixed_values},
        }
        if pattern.d is not None:
            out["d"] = pattern.d
        return out
    if isinstance(pattern, CompanionVarP):
        out = {"kind": "companion_var_p", "d0": pattern.d0, "p": pattern.p}
        if pattern.inner is not None:
            out["inner"] = pattern_to_json(pattern.inner)
        return out
    raise RestrictionError(f"unknown pattern type {type(pattern)!r}")


def pattern_from_json(obj) -> RestrictionPattern:
    if isinstance(obj, str):
        obj = json.loads(obj)
    kind = obj["kind"]
    if kind == "unrestricted":
        return Unrestricted(d=obj["d"])
    if kind == "banded":
        return Banded(d=obj["d"], k0=obj["k0"])
    if kind == "network":
        return Network(d=obj["d"], adjacency=np.asarray(obj["adjacency"], dtype=bool))
    if kind == "grouped":
        return Grouped(d=obj["d"], K=obj["K"])
    if kind == "scaled_identity":
        return ScaledIdentity(d=obj["d"])
    if kind == "custom":
        return Custom(
            zero_set=tuple(obj.get("zero_set", ())),
            equality_classes=tuple(tuple(c) for c in obj.get("equality_classes", ())),
            fixed_values=tuple(
                (int(i), float(v)) for i, v in obj.get("fixed_values", {}).items()
            ),
            d=obj.get("d"),
        )
    if kind == "companion_var_p":
        inner = obj.get("inner")
        return CompanionVarP(
            d0=obj["d0"],
            p=obj["p"],
            inner=pattern_from_json(inner) if inner is not None else None,
        )
    raise RestrictionError(f"unknown pattern kind {kind!r}")


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------

def _compile_classes(q: int, d: int, zero: set, classes: list,
                     fixed: dict) -> RestrictionBasis:
    """Build (R, gamma) from zero/equality/fixed index sets.

    Every index not mentioned becomes a singleton equality class.
    Columns are ordered lexicographically by the smallest member index.
    """
    N = q * d
    assigned = set(zero) | set(fixed)
    for cls in classes:
        assigned.update(cls)
    if assigned and max(assigned) >= N:
        raise RestrictionError(f"index {max(assigned)} out of range for N={N}")
    all_classes = [tuple(sorted(c)) for c in classes]
    all_classes += [(i,) for i in range(N) if i not in assigned]
    all_classes.sort(key=lambda c: c[0])
    R = np.zeros((N, len(all_classes)))
    for col, cls in enumerate(all_classes):
        for idx in cls:
            R[idx, col] = 1.0
    gamma = np.zeros(N)
    for idx, val in fixed.items():
        gamma[idx] = val
    return RestrictionBasis(R=R, gamma=gamma, q=q, d=d)


def build_basis(pattern: RestrictionPattern,
                shape: Optional[tuple] = None) -> RestrictionBasis:
    """Construct the basis form (R, gamma) of a restriction pattern.

    ``shape`` is (q, d); it defaults to the square shape implied by the
    pattern. gamma is zero for every pattern except the companion form,
    whose fixed sub-diagonal ones live in gamma.
    """
    if isinstance(pattern, CompanionVarP):
        return _companion_basis(pattern)

    d = pattern.d
    if d is None:
        if shape is None:
            raise RestrictionError(
                "custom pattern needs d or an explicit (q, d) shape"
            )
        d = shape[1]
    q = d
    if shape is not None:
        q, d_given = shape
        if not isinstance(pattern, (Unrestricted, Custom)) and (q != d or d_given != d):
            raise RestrictionError(
                f"pattern {pattern.kind} requires square shape q=d={pattern.d}"
            )
        d = d_given

    if isinstance(pattern, Unrestricted):
        N = q * d
        return RestrictionBasis(R=np.eye(N), gamma=np.zeros(N), q=q, d=d)

    if isinstance(pattern, Banded):
        # free entries are singletons; just zero out the off-band
        zero = {
            i * d + j
            for i in range(d)
            for j in range(d)
            if abs(i - j) > pattern.k0
        }
        return _compile_classes(q, d, zero, [], {})

    if isinstance(pattern, Network):
        adj = pattern.adjacency
        diag_class = tuple(i * d + i for i in range(d))
        edge_class = tuple(
            i * d + j for i in range(d) for j in range(d) if i != j and adj[i, j]
        )
        zero = {
            i * d + j
            for i in range(d)
            for j in range(d)
            if i != j and not adj[i, j]
        }
        classes = [diag_class]
        if len(edge_class) >= 2:
            classes.append(edge_class)
        # a single edge falls through as a singleton free entry
        return _compile_classes(q, d, zero, classes, {})

    if isinstance(pattern, Grouped):
        K, b = pattern.K, d // pattern.K
        zero: set = set()
        classes = []
        for i in range(d):
            for k in range(K):
                members = tuple(
                    i * d + j for j in range(k * b, (k + 1) * b) if j != i
                )
                if len(members) >= 2:
                    classes.append(members)
        return _compile_classes(q, d, zero, classes, {})

    if isinstance(pattern, ScaledIdentity):
        diag_class = tuple(i * d + i for i in range(d))
        zero = {i * d + j for i in range(d) for j in range(d) if i != j}
        return _compile_classes(q, d, zero, [diag_class], {})

    if isinstance(pattern, Custom):
        return _compile_classes(
            q,
            d,
            set(pattern.zero_set),
            [list(c) for c in pattern.equality_classes],
            dict(pattern.fixed_values),
        )

    raise RestrictionError(f"unknown pattern type {type(pattern)!r}")


def _companion_basis(pattern: CompanionVarP) -> RestrictionBasis:
    d0, p = pattern.d0, pattern.p
    d = d0 * p
    N = d * d

    if pattern.inner is None:
        inner_bases = [
            RestrictionBasis(R=np.eye(d0 * d0), gamma=np.zeros(d0 * d0), q=d0, d=d0)
            for _ in range(p)
        ]
    else:
        inner_bases = [build_basis(pattern.inner) for _ in range(p)]
        for rb in inner_bases:
            if rb.q != d0 or rb.d != d0:
                raise RestrictionError(
                    f"inner pattern must be on d0={d0}, got {rb.q}x{rb.d}"
                )
            if np.any(rb.gamma != 0):
                raise RestrictionError("inner pattern must have gamma = 0")

    m = sum(rb.m for rb in inner_bases)
    R = np.zeros((N, m))
    gamma = np.zeros(N)
    col0 = 0
    for ell, rb in enumerate(inner_bases):
        # block ell occupies columns [ell*d0, (ell+1)*d0) of the first block row
        for i in range(d0):
            rows = slice(i * d + ell * d0, i * d + (ell + 1) * d0)
            R[rows, col0 : col0 + rb.m] = rb.block(i)
        col0 += rb.m
    # identity sub-diagonal below the first block row, fixed in gamma
    for i in range(d0, d):
        gamma[i * d + (i - d0)] = 1.0
    return RestrictionBasis(R=R, gamma=gamma, q=d, d=d)


# ---------------------------------------------------------------------------
# Conversions
# ---------------------------------------------------------------------------

def _infer_shape(N: int, shape: Optional[tuple]) -> tuple:
    if shape is not None:
        q, d = shape
        if q * d != N:
            raise RestrictionError(f"shape {shape} inconsistent with N={N}")
        return q, d
    root = int(round(np.sqrt(N)))
    if root * root == N:
        return root, root
    return 1, N


def basis_from_constraints(cf: ConstraintForm,
                           shape: Optional[tuple] = None) -> RestrictionBasis:
    """Convert (C, mu) to (R, gamma).

    C_plus is taken as an orthonormal basis of the null space of C, so
    the stacked matrix (C_plus; C) is invertible and R is its inverse's
    first m columns. This choice keeps R well-conditioned. ``shape``
    fixes the (q, d) block partition; square is assumed when omitted.
    """
    N, m = cf.N, cf.m
    q, d = _infer_shape(N, shape)
    if m == N:
        return RestrictionBasis(R=np.eye(N), gamma=np.zeros(N), q=q, d=d)
    C_plus = null_space(cf.C).T  # m x N, orthonormal rows
    C_full = np.vstack([C_plus, cf.C])
    C_full_inv = np.linalg.inv(C_full)
    R = C_full_inv[:, :m]
    R_plus = C_full_inv[:, m:]
    gamma = R_plus @ cf.mu
    return RestrictionBasis(R=R, gamma=gamma, q=q, d=d)


def constraints_from_basis(rb: RestrictionBasis) -> ConstraintForm:
    """Convert (R, gamma) to (C, mu) with orthonormal C rows."""
    if rb.m == rb.N:
        return ConstraintForm(C=np.zeros((0, rb.N)), mu=np.zeros(0))
    C = null_space(rb.R.T).T  # (N-m) x N, orthonormal rows of left null space
    mu = C @ rb.gamma
    return ConstraintForm(C=C, mu=mu)


@dataclass(frozen=True)
class NestingReport:
    nested: bool
    projector_residual: float
    factor: Optional[np.ndarray]  # R2 with R_fine = R_coarse @ R2, when nested


def nest_check(coarse: RestrictionBasis, fine: RestrictionBasis,
               tol: float = 1e-8) -> NestingReport:
    """Check span(R_fine) subseteq span(R_coarse) via projector residual."""
    if coarse.N != fine.N:
        raise RestrictionError(
            f"dimension mismatch: N={coarse.N} vs {fine.N}"
        )
    Q, _ = np.linalg.qr(coarse.R)
    residual = fine.R - Q @ (Q.T @ fine.R)
    res_norm = float(np.linalg.norm(residual) / max(1.0, np.linalg.norm(fine.R)))
    if res_norm > tol:
        return NestingReport(nested=False, projector_residual=res_norm, factor=None)
    factor, *_ = np.linalg.lstsq(coarse.R, fine.R, rcond=None)
    return NestingReport(nested=True, projector_residual=res_norm, factor=factor)
