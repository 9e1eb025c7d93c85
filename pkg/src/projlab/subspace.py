"""Subspaces of R^d stored as orthonormal bases, plus their projectors.

A :class:`Subspace` is the single representation used for ``A``, ``B``,
``A ∩ B`` and the orthogonal complements.  The zero subspace is a regular
value with a ``d × 0`` basis, so ``P_{A∩B}`` is defined even when the
intersection is trivial.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidInput

RANK_TOL = 1e-10
ORTHO_TOL = 1e-12
MEMBER_TOL = 1e-10


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Subspace:
    """Linear subspace of R^d given by a ``d × k`` orthonormal basis."""

    basis: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=float)
        if b.ndim != 2 or b.shape[0] < 1:
            raise InvalidInput(f"basis must be a d x k matrix with d >= 1, got shape {b.shape}")
        if not np.all(np.isfinite(b)):
            raise InvalidInput("basis contains non-finite entries")
        d, k = b.shape
        if k > d:
            raise InvalidInput(f"k={k} exceeds ambient dimension d={d}")
        if k:
            gram_err = np.max(np.abs(b.T @ b - np.eye(k)))
            if gram_err > ORTHO_TOL:
                raise InvalidInput(f"basis columns are not orthonormal (max |B^T B - I| = {gram_err:.3g})")
        object.__setattr__(self, "basis", _frozen(b))

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    d = ambient_dim

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    k = dim

    def project(self, x: np.ndarray) -> np.ndarray:
        """Orthogonal projection of ``x`` (vector or matrix of columns)."""
        x = np.asarray(x, dtype=float)
        return self.basis @ (self.basis.T @ x)

    def contains(self, x: np.ndarray, tol: float = MEMBER_TOL) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.linalg.norm(self.project(x) - x) <= tol * np.linalg.norm(x))

    def to_dict(self) -> dict:
        # row-major k x d: one row per basis vector
        return {"d": self.ambient_dim, "basis": self.basis.T.ravel().tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "Subspace":
        try:
            d = int(data["d"])
            flat = np.asarray(data["basis"], dtype=float).ravel()
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInput(f"malformed subspace object: {exc}") from exc
        if d < 1 or flat.size % d:
            raise InvalidInput(f"basis length {flat.size} is not a multiple of d={d}")
        return cls(flat.reshape(flat.size // d, d).T)

    def __repr__(self):
        return f"Subspace(d={self.ambient_dim}, k={self.dim})"


@dataclass(frozen=True, eq=False)
class SymmetricOperator:
    """Dense symmetric ``d × d`` matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise InvalidInput(f"operator must be a nonempty square matrix, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise InvalidInput("operator contains non-finite entries")
        scale = 1.0 + np.max(np.abs(m))
        if np.max(np.abs(m - m.T)) > 1e-12 * scale:
            raise InvalidInput("operator matrix is not symmetric")
        object.__setattr__(self, "matrix", _frozen(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __matmul__(self, other):
        if isinstance(other, SymmetricOperator):
            return self.matrix @ other.matrix
        return self.matrix @ np.asarray(other, dtype=float)

    def __add__(self, other: "SymmetricOperator") -> "SymmetricOperator":
        return SymmetricOperator(self.matrix + other.matrix)

    def __sub__(self, other: "SymmetricOperator") -> "SymmetricOperator":
        return SymmetricOperator(self.matrix - other.matrix)

    def scale(self, c: float) -> "SymmetricOperator":
        return SymmetricOperator(c * self.matrix)

    def norm(self) -> float:
        return float(np.linalg.norm(self.matrix, 2))

    def __repr__(self):
        return f"SymmetricOperator(dim={self.dim})"


def symmetrize(m: np.ndarray) -> SymmetricOperator:
    """Wrap a product that is symmetric in exact arithmetic, e.g. ``P_B P_A P_B``."""
    m = np.asarray(m, dtype=float)
    return SymmetricOperator(0.5 * (m + m.T))


def zero_subspace(d: int) -> Subspace:
    return Subspace(np.zeros((d, 0)))


def full_space(d: int) -> Subspace:
    return Subspace(np.eye(d))


def orthonormalize(raw, tol: float = RANK_TOL) -> Subspace:
    """Orthonormal basis for the column space of ``raw``.

    Numerical rank counts singular values above ``tol`` times the largest one.
    """
    raw = np.asarray(raw, dtype=float)
    if raw.ndim == 1:
        raw = raw[:, None]
    if raw.ndim != 2 or raw.shape[0] < 1:
        raise InvalidInput(f"expected a d x m matrix, got shape {raw.shape}")
    if not np.all(np.isfinite(raw)):
        raise InvalidInput("input contains non-finite entries")
    d, m = raw.shape
    if m == 0:
        return zero_subspace(d)
    u, s, _ = np.linalg.svd(raw, full_matrices=False)
    if s[0] == 0.0:
        return zero_subspace(d)
    rank = int(np.sum(s > tol * s[0]))
    return Subspace(u[:, :rank])


def projector(S: Subspace) -> SymmetricOperator:
    b = S.basis
    return symmetrize(b @ b.T)


def complement(S: Subspace) -> Subspace:
    d, k = S.basis.shape
    if k == 0:
        return full_space(d)
    if k == d:
        return zero_subspace(d)
    u, _, _ = np.linalg.svd(S.basis, full_matrices=True)
    c = u[:, k:]
    # one re-projection sweep keeps |<c_i, b_j>| at rounding level
    c = c - S.basis @ (S.basis.T @ c)
    q, _ = np.linalg.qr(c)
    return Subspace(q)


def _check_same_space(A: Subspace, B: Subspace):
    if A.ambient_dim != B.ambient_dim:
        raise InvalidInput(f"ambient dimensions differ: {A.ambient_dim} vs {B.ambient_dim}")


def intersect(A: Subspace, B: Subspace, tol: float = RANK_TOL) -> Subspace:
    """``A ∩ B`` as the eigenspace of ``(P_A + P_B)/2`` at eigenvalue 1."""
    _check_same_space(A, B)
    if A.dim == 0 or B.dim == 0:
        return zero_subspace(A.ambient_dim)
    avg = 0.5 * (projector(A).matrix + projector(B).matrix)
    vals, vecs = np.linalg.eigh(avg)
    keep = vals >= 1.0 - tol
    return Subspace(vecs[:, keep]) if keep.any() else zero_subspace(A.ambient_dim)


def sum_of(*spaces: Subspace, tol: float = RANK_TOL) -> Subspace:
    """Span of the union of several subspaces (the direct sums used for nullspaces)."""
    d = spaces[0].ambient_dim
    for S in spaces[1:]:
        _check_same_space(spaces[0], S)
    return orthonormalize(np.hstack([S.basis for S in spaces]) if spaces else np.zeros((d, 0)), tol)


def _rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.uint64(int(seed) & 0xFFFFFFFFFFFFFFFF))


def random_orthogonal(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed orthogonal matrix."""
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    return q * np.sign(np.diag(r))


def random_subspace(d: int, k: int, seed: int) -> Subspace:
    if d < 1:
        raise InvalidInput("d must be positive")
    if not 0 <= k <= d:
        raise InvalidInput(f"k={k} must lie in [0, {d}]")
    if k == 0:
        return zero_subspace(d)
    q, _ = np.linalg.qr(_rng(seed).standard_normal((d, k)))
    return Subspace(q)


def subspaces_with_angles(
    d: int,
    angles: Sequence[float],
    seed: int,
    extra_a: int = 0,
    extra_b: int = 0,
) -> tuple[Subspace, Subspace]:
    """Random pair ``(A, B)`` with prescribed principal angles.

    Parameters
    ----------
    d : int
        Ambient dimension.
    angles : sequence of float
        Nondecreasing principal angles in ``[0, pi/2]``.
    seed : int
        Seed for the random rotation applied to the whole configuration.
    extra_a, extra_b : int
        Additional directions of ``A`` (resp. ``B``) orthogonal to the other
        subspace.  They make ``dim A != dim B`` possible without changing
        the principal angles.

    Returns
    -------
    (A, B) : tuple of Subspace
    """
    theta = np.asarray(angles, dtype=float).ravel()
    if theta.size == 0:
        raise InvalidInput("need at least one angle")
    if np.any(theta < 0) or np.any(theta > np.pi / 2 + 1e-15) or not np.all(np.isfinite(theta)):
        raise InvalidInput("angles must lie in [0, pi/2]")
    if np.any(np.diff(theta) < 0):
        raise InvalidInput("angles must be nondecreasing")
    if extra_a < 0 or extra_b < 0:
        raise InvalidInput("extra dimensions must be nonnegative")
    theta = np.minimum(theta, np.pi / 2)
    nonzero = theta > 0
    need = theta.size + int(nonzero.sum()) + extra_a + extra_b
    if d < need:
        raise InvalidInput(f"d={d} too small: these angles need d >= {need}")

    Q = random_orthogonal(d, _rng(seed))
    p = theta.size
    u = Q[:, :p]
    col = p
    b = u.copy()
    for n in np.flatnonzero(nonzero):
        g = Q[:, col]
        col += 1
        b[:, n] = np.cos(theta[n]) * u[:, n] + np.sin(theta[n]) * g
    a_extra = Q[:, col:col + extra_a]
    col += extra_a
    b_extra = Q[:, col:col + extra_b]
    A = Subspace(np.hstack([u, a_extra]))
    B = Subspace(np.hstack([b, b_extra]))
    return A, B
