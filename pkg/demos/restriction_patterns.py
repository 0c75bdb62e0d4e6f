"""Tour of the restriction patterns and their two encodings.

Every pattern compiles to an affine basis beta = R theta + gamma for
beta = vec(A^T); the equivalent constraint form C beta = mu can be
recovered, and pattern nesting can be tested via column spans.
"""

import numpy as np

from restricted_var import (
    Banded,
    CompanionVarP,
    Custom,
    Grouped,
    Network,
    ScaledIdentity,
    Unrestricted,
    build_basis,
    constraints_from_basis,
    nest_check,
    pattern_to_json,
)


def show(pattern, note=""):
    basis = build_basis(pattern)
    print(f"{pattern.kind:<16} N = {basis.N:<5} m = {basis.m:<5} {note}")
    return basis


def main():
    d = 24
    print("pattern           free parameters")
    show(Unrestricted(d=d))
    show(Banded(d=d, k0=1), "entries within bandwidth 1 of the diagonal")
    show(Banded(d=d, k0=3))
    show(Banded(d=d, k0=7))
    show(Grouped(d=d, K=2), "one shared value per (row, group)")
    show(Grouped(d=d, K=4))
    show(Grouped(d=d, K=12))
    show(ScaledIdentity(d=d), "a single scalar multiplying the identity")

    adj = np.zeros((d, d), dtype=bool)
    rng = np.random.default_rng(0)
    for _ in range(40):
        i, j = rng.integers(0, d, size=2)
        if i != j:
            adj[i, j] = True
    show(Network(d=d, adjacency=adj),
         "one diagonal weight plus one shared edge weight")

    print("\nVAR(3) companion form on d0 = 4 (VAR(1) of dimension 12):")
    basis = show(CompanionVarP(d0=4, p=3),
                 "lag blocks free, sub-diagonal identity fixed in gamma")
    A = basis.coefficient_matrix(np.zeros(basis.m))
    print("A(0) lower rows carry the identity sub-diagonal:")
    print(A[4:, :8].astype(int))

    print("\nCustom pattern: zeros, one equality class, one pinned value")
    pat = Custom(zero_set=(1, 2), equality_classes=((0, 5),),
                 fixed_values=((7, 0.25),), d=3)
    basis = build_basis(pat)
    print("as JSON:", pattern_to_json(pat))
    cf = constraints_from_basis(basis)
    print(f"constraint form: C is {cf.C.shape[0]} x {cf.C.shape[1]}, "
          f"max |C R| = {np.max(np.abs(cf.C @ basis.R)):.2e}")

    print("\nNesting: scaled identity sits inside every band")
    coarse = build_basis(Banded(d=8, k0=1))
    fine = build_basis(ScaledIdentity(d=8))
    rep = nest_check(coarse, fine)
    print(f"nested = {rep.nested}, projector residual = "
          f"{rep.projector_residual:.2e}")


if __name__ == "__main__":
    main()
