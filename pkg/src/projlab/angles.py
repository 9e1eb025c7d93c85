"""Dixmier, Friedrichs and principal angles between two subspaces."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput, NumericalFailure
from .subspace import RANK_TOL, Subspace, intersect


@dataclass(frozen=True, eq=False)
class AngleProfile:
    """Principal cosines and reciprocal vector pairs of ``(A, B)``.

    ``cosines[n]`` is ``cos θ_{n+1}``; columns ``u[:, n]`` and ``v[:, n]``
    are the corresponding principal vectors in ``A`` and ``B``.  ``f`` and
    ``r`` are 1-based, so the Friedrichs cosine is ``cosines[f - 1]``.
    """

    cosines: np.ndarray
    u: np.ndarray
    v: np.ndarray
    f: int
    r: int
    dixmier_cos: float
    friedrichs_cos: float
    degenerate_nested: bool

    @property
    def p(self) -> int:
        return self.cosines.size

    @property
    def angles(self) -> np.ndarray:
        return np.arccos(self.cosines)

    @property
    def lambdas(self) -> np.ndarray:
        return self.cosines ** 2

    @property
    def principal_pairs(self) -> list[tuple[np.ndarray, np.ndarray]]:
        return [(self.u[:, n], self.v[:, n]) for n in range(self.p)]

    @property
    def intersection_dim(self) -> int:
        return self.f - 1

    def to_dict(self) -> dict:
        return {
            "cosines": self.cosines.tolist(),
            "f": self.f,
            "r": self.r,
            "friedrichs_cos": self.friedrichs_cos,
            "dixmier_cos": self.dixmier_cos,
            "degenerate_nested": self.degenerate_nested,
        }


def principal_angles(A: Subspace, B: Subspace, tol: float = RANK_TOL) -> AngleProfile:
    """Principal angles from one SVD of ``A.basis^T B.basis``.

    Cosines below ``tol`` count as zero when computing ``r``.  ``f`` comes
    from the dimension of :func:`~projlab.subspace.intersect` and is checked
    against the number of unit cosines.
    """
    if A.ambient_dim != B.ambient_dim:
        raise InvalidInput(f"ambient dimensions differ: {A.ambient_dim} vs {B.ambient_dim}")
    if A.dim == 0 or B.dim == 0:
        raise InvalidInput("principal angles need nontrivial subspaces")

    y, s, zt = np.linalg.svd(A.basis.T @ B.basis, full_matrices=False)
    s = np.clip(s, 0.0, 1.0)
    u = A.basis @ y
    v = B.basis @ zt.T

    f = intersect(A, B, tol).dim + 1
    # mu = (1 + c)/2 >= 1 - tol  <=>  c >= 1 - 2 tol
    n_unit = int(np.sum(s >= 1.0 - 2.0 * tol))
    if n_unit != f - 1:
        raise NumericalFailure(
            f"intersection dimension {f - 1} disagrees with {n_unit} unit cosines; "
            "an angle sits at the rank tolerance"
        )
    r = int(np.sum(s > tol))
    p = s.size
    return AngleProfile(
        cosines=s,
        u=u,
        v=v,
        f=f,
        r=r,
        dixmier_cos=float(s[0]),
        friedrichs_cos=float(s[f - 1]) if f <= r else 0.0,
        degenerate_nested=(f - 1 == p),
    )


def dixmier_cos(profile: AngleProfile) -> float:
    return profile.dixmier_cos


def friedrichs_cos(profile: AngleProfile) -> float:
    """Cosine of the smallest nonzero principal angle; 0 when none exists.

    A nested pair (``A ⊆ B`` or ``B ⊆ A``) also yields 0 and is marked by
    ``profile.degenerate_nested``.
    """
    return profile.friedrichs_cos


def subspace_gap(S1: Subspace, S2: Subspace) -> float:
    """Largest principal angle between two subspaces of equal dimension.

    Returns ``pi/2`` when the dimensions differ.  Computed from sines so that
    tiny angles are not lost to ``arccos`` near 1.
    """
    if S1.ambient_dim != S2.ambient_dim:
        raise InvalidInput("ambient dimensions differ")
    if S1.dim != S2.dim:
        return float(np.pi / 2)
    if S1.dim == 0:
        return 0.0
    resid = S1.basis - S2.project(S1.basis)
    return float(np.arcsin(min(1.0, np.linalg.norm(resid, 2))))
