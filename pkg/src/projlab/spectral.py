"""Eigen-structure of ``P_B P_A P_B``, ``P_A P_B P_A`` and ``(P_A + P_B)/2``.

Eigenvalues are grouped into clusters so that geometric multiplicities
survive floating point.  On top of the generic decomposition this module
provides the closed-form eigenspace maps that only use ``P_A`` and ``P_B``,
the nullspace characterizations, and the eigenvalue correspondence
``mu = 1/2 ± sqrt(lambda)/2`` for both full and active spectra.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .angles import principal_angles, subspace_gap
from .errors import (
    DegenerateStart,
    InvalidInput,
    NotAnEigenvector,
    NumericalFailure,
    OrthogonalSubspaces,
    PreconditionViolated,
)
from .subspace import (
    MEMBER_TOL,
    RANK_TOL,
    Subspace,
    SymmetricOperator,
    complement,
    intersect,
    projector,
    sum_of,
    symmetrize,
    zero_subspace,
)

CLUSTER_TOL = 1e-9
EPS_ACT = 1e-8
EIG_RESID_TOL = 1e-8
MATCH_TOL = 1e-9


# --------------------------------------------------------------------------
# generic decomposition


@dataclass(frozen=True, eq=False)
class Cluster:
    value: float
    multiplicity: int
    eigenbasis: np.ndarray

    def project(self, x: np.ndarray) -> np.ndarray:
        return self.eigenbasis @ (self.eigenbasis.T @ x)

    def subspace(self) -> Subspace:
        return Subspace(self.eigenbasis)


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Eigenvalue clusters in strictly decreasing order of value."""

    clusters: tuple[Cluster, ...]
    cluster_tol: float
    scale: float = 1.0

    @property
    def abs_tol(self) -> float:
        return self.cluster_tol * self.scale

    @property
    def dim(self) -> int:
        return self.clusters[0].eigenbasis.shape[0]

    @property
    def values(self) -> np.ndarray:
        return np.array([c.value for c in self.clusters])

    @property
    def multiplicities(self) -> list[int]:
        return [c.multiplicity for c in self.clusters]

    def find(self, value: float) -> Optional[Cluster]:
        best = None
        for c in self.clusters:
            dist = abs(c.value - value)
            if dist <= self.abs_tol and (best is None or dist < abs(best.value - value)):
                best = c
        return best

    def eigenspace(self, value: float) -> Subspace:
        c = self.find(value)
        return c.subspace() if c is not None else zero_subspace(self.dim)

    def reconstruct(self) -> np.ndarray:
        return sum(c.value * c.eigenbasis @ c.eigenbasis.T for c in self.clusters)

    def multiset(self, exclude=()) -> list[float]:
        """Eigenvalues repeated by multiplicity, skipping clusters at ``exclude``."""
        out = []
        for c in self.clusters:
            if any(abs(c.value - e) <= self.abs_tol for e in exclude):
                continue
            out.extend([c.value] * c.multiplicity)
        return out

    def to_dict(self) -> dict:
        return {
            "cluster_tol": self.cluster_tol,
            "clusters": [{"value": c.value, "multiplicity": c.multiplicity} for c in self.clusters],
        }


def _as_matrix(T) -> np.ndarray:
    if isinstance(T, SymmetricOperator):
        return T.matrix
    return SymmetricOperator(T).matrix


def eig_sym(T, cluster_tol: float = CLUSTER_TOL) -> SpectralDecomposition:
    """Clustered eigendecomposition of a symmetric operator.

    Sorted raw eigenvalues are merged whenever consecutive values are within
    ``cluster_tol * max(1, ||T||)``; a cluster's value is the mean of its
    members.
    """
    m = _as_matrix(T)
    if cluster_tol <= 0:
        raise InvalidInput("cluster_tol must be positive")
    try:
        vals, vecs = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"symmetric eigensolver failed: {exc}") from exc
    order = np.argsort(vals)[::-1]
    vals, vecs = vals[order], vecs[:, order]
    scale = max(1.0, float(np.max(np.abs(vals))))
    tol = cluster_tol * scale

    clusters = []
    start = 0
    for i in range(1, vals.size + 1):
        if i == vals.size or vals[i - 1] - vals[i] > tol:
            block = slice(start, i)
            clusters.append(Cluster(float(np.mean(vals[block])), i - start, vecs[:, block]))
            start = i
    return SpectralDecomposition(tuple(clusters), cluster_tol, scale)


def eigenspace_projection(D: SpectralDecomposition, value: float, x) -> np.ndarray:
    """Component of ``x`` in the eigenspace at ``value``; zero if ``value`` is not an eigenvalue."""
    x = np.asarray(x, dtype=float)
    if x.shape[0] != D.dim:
        raise InvalidInput(f"vector has length {x.shape[0]}, operator has dimension {D.dim}")
    c = D.find(value)
    return c.project(x) if c is not None else np.zeros_like(x)


@dataclass(frozen=True)
class ActiveSpectrum:
    """Eigenvalues whose eigenspace carries a non-negligible part of ``x``."""

    entries: tuple[tuple[float, float], ...]
    eps_act: float
    x_norm: float

    @property
    def values(self) -> list[float]:
        return [v for v, _ in self.entries]

    def norm_of(self, value: float, tol: float = MATCH_TOL) -> float:
        for v, n in self.entries:
            if abs(v - value) <= tol:
                return n
        return 0.0

    def without(self, *excluded: float, tol: float = CLUSTER_TOL) -> list[float]:
        return [v for v in self.values if all(abs(v - e) > tol for e in excluded)]

    def to_dict(self) -> dict:
        return {"eps_act": self.eps_act, "entries": [{"value": v, "norm": n} for v, n in self.entries]}


def active_spectrum(D: SpectralDecomposition, x, eps_act: float = EPS_ACT) -> ActiveSpectrum:
    x = np.asarray(x, dtype=float)
    nx = float(np.linalg.norm(x))
    if nx == 0.0:
        raise InvalidInput("active spectrum of the zero vector is undefined")
    entries = []
    for c in D.clusters:
        n = float(np.linalg.norm(c.project(x)))
        if n > eps_act * nx:
            entries.append((c.value, n))
    return ActiveSpectrum(tuple(entries), eps_act, nx)


def spectral_shift(T, lam: float, D: SpectralDecomposition) -> SymmetricOperator:
    """``T - lam * P_{N(lam - T)}``; returns ``T`` unchanged if ``lam`` is not an eigenvalue."""
    if lam == 0:
        raise InvalidInput("spectral shift is defined for nonzero lambda only")
    m = _as_matrix(T)
    c = D.find(lam)
    if c is None:
        return SymmetricOperator(m)
    E = c.eigenbasis
    return symmetrize(m - lam * (E @ E.T))


# --------------------------------------------------------------------------
# the operators of a pair


class PairOperators(NamedTuple):
    PA: np.ndarray
    PB: np.ndarray
    PAB: np.ndarray
    S: SymmetricOperator  # P_B P_A P_B
    S_prime: SymmetricOperator  # P_A P_B P_A
    T: SymmetricOperator  # (P_A + P_B) / 2
    AB: Subspace


def pair_operators(A: Subspace, B: Subspace) -> PairOperators:
    if A.ambient_dim != B.ambient_dim:
        raise InvalidInput(f"ambient dimensions differ: {A.ambient_dim} vs {B.ambient_dim}")
    PA = projector(A).matrix
    PB = projector(B).matrix
    AB = intersect(A, B)
    PAB = projector(AB).matrix
    S = symmetrize(PB @ PA @ PB)
    S_prime = symmetrize(PA @ PB @ PA)
    T = symmetrize(0.5 * (PA + PB))
    return PairOperators(PA, PB, PAB, S, S_prime, T, AB)


def _eig_residual(M: np.ndarray, x: np.ndarray, value: float) -> float:
    nx = np.linalg.norm(x)
    if nx == 0:
        raise InvalidInput("eigenvector must be nonzero")
    return float(np.linalg.norm(M @ x - value * x) / nx)


def _check_unit_interval(name: str, value: float):
    if not 0.0 < value < 1.0:
        raise InvalidInput(f"{name} must lie in (0, 1), got {value}")


def lift_product_eigvec(u, lam: float, A: Subspace, B: Subspace) -> tuple[np.ndarray, np.ndarray]:
    """Split an eigenvector of ``P_A P_B P_A`` along the spectrum of ``P_B P_A P_B``.

    For ``u`` in ``N(lam - P_A P_B P_A)`` with ``0 < lam < 1`` the pieces are
    ``P_{B⊥} u`` (in the nullspace) and ``P_B u`` (in ``N(lam - P_B P_A P_B)``),
    with squared norms ``(1 - lam)||u||^2`` and ``lam ||u||^2``.
    """
    _check_unit_interval("lambda", lam)
    u = np.asarray(u, dtype=float)
    PA = projector(A).matrix
    if _eig_residual(PA @ projector(B).matrix @ PA, u, lam) > EIG_RESID_TOL:
        raise NotAnEigenvector(f"u is not in N({lam} - P_A P_B P_A)")
    eig_part = B.project(u)
    return u - eig_part, eig_part


def split_avg_eigvec(
    w, mu: float, A: Subspace, B: Subspace, cluster_tol: float = CLUSTER_TOL
) -> tuple[np.ndarray, np.ndarray, Optional[float]]:
    """Split an eigenvector of ``(P_A + P_B)/2`` along the spectrum of ``P_B P_A P_B``.

    Returns ``(null_part, eig_part, lam)``.  At ``mu = 1/2`` the whole vector
    lies in the nullspace and ``lam`` is ``None``; otherwise
    ``lam = (2 mu - 1)^2`` and ``eig_part = P_B w``.
    """
    _check_unit_interval("mu", mu)
    w = np.asarray(w, dtype=float)
    T = 0.5 * (projector(A).matrix + projector(B).matrix)
    if _eig_residual(T, w, mu) > EIG_RESID_TOL:
        raise NotAnEigenvector(f"w is not in N({mu} - (P_A + P_B)/2)")
    if abs(mu - 0.5) <= cluster_tol:
        return w.copy(), np.zeros_like(w), None
    eig_part = B.project(w)
    return w - eig_part, eig_part, (2.0 * mu - 1.0) ** 2


def avg_pair_from_product_eigvec(u, lam: float, A: Subspace, B: Subspace) -> tuple[np.ndarray, np.ndarray]:
    """``w_± = u/2 ± P_B u / (2 sqrt(lam))``, eigenvectors of ``(P_A + P_B)/2`` at ``1/2 ± sqrt(lam)/2``."""
    _check_unit_interval("lambda", lam)
    u = np.asarray(u, dtype=float)
    PA = projector(A).matrix
    if _eig_residual(PA @ projector(B).matrix @ PA, u, lam) > EIG_RESID_TOL:
        raise NotAnEigenvector(f"u is not in N({lam} - P_A P_B P_A)")
    half = 0.5 * u
    shift = B.project(u) / (2.0 * np.sqrt(lam))
    return half - shift, half + shift


# --------------------------------------------------------------------------
# nullspaces


@dataclass
class NullspaceEntry:
    name: str
    spectral: Subspace
    formula: Subspace

    @property
    def gap(self) -> float:
        return subspace_gap(self.spectral, self.formula)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "dim_spectral": self.spectral.dim,
            "dim_formula": self.formula.dim,
            "gap": self.gap,
        }


@dataclass
class NullspaceReport:
    entries: list[NullspaceEntry]
    tol: float = 1e-9

    @property
    def max_gap(self) -> float:
        return max(e.gap for e in self.entries)

    @property
    def ok(self) -> bool:
        return self.max_gap <= self.tol

    def __getitem__(self, name: str) -> NullspaceEntry:
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {"ok": self.ok, "tol": self.tol, "max_gap": self.max_gap, "entries": [e.to_dict() for e in self.entries]}


def _null_of_general(M: np.ndarray, tol: float = RANK_TOL) -> Subspace:
    d = M.shape[0]
    u, s, vt = np.linalg.svd(M)
    if s[0] == 0:
        return Subspace(np.eye(d))
    rank = int(np.sum(s > tol * max(1.0, s[0])))
    return Subspace(vt[rank:].T) if rank < d else zero_subspace(d)


def nullspace_report(A: Subspace, B: Subspace, cluster_tol: float = CLUSTER_TOL, tol: float = 1e-9) -> NullspaceReport:
    """Nullspaces found spectrally versus their direct-sum descriptions.

    ========================  =====================================
    operator                  direct sum
    ========================  =====================================
    ``P_A P_B``               ``B⊥ ⊕ (A⊥ ∩ B)``
    ``P_B P_A P_B``           ``B⊥ ⊕ (A⊥ ∩ B)``
    ``(P_A+P_B)/2``           ``A⊥ ∩ B⊥``
    ``1/2 - (P_A+P_B)/2``     ``(A⊥ ∩ B) ⊕ (A ∩ B⊥)``
    ``P_B P_A P_B - P_A∩B``   ``B⊥ ⊕ (A⊥ ∩ B) ⊕ (A ∩ B)``
    ``(P_A+P_B)/2 - P_A∩B``   ``(A⊥ ∩ B⊥) ⊕ (A ∩ B)``
    ========================  =====================================
    """
    ops = pair_operators(A, B)
    Ac, Bc = complement(A), complement(B)
    AcB = intersect(Ac, B)
    ABc = intersect(A, Bc)
    AcBc = intersect(Ac, Bc)
    AB = ops.AB

    def null(T, at: float = 0.0) -> Subspace:
        return eig_sym(T, cluster_tol).eigenspace(at)

    entries = [
        NullspaceEntry("N(PA PB)", _null_of_general(ops.PA @ ops.PB), sum_of(Bc, AcB)),
        NullspaceEntry("N(PB PA PB)", null(ops.S), sum_of(Bc, AcB)),
        NullspaceEntry("N(T)", null(ops.T), AcBc),
        NullspaceEntry("N(1/2 - T)", null(ops.T, 0.5), sum_of(AcB, ABc)),
        NullspaceEntry("N(PB PA PB - PAB)", null(symmetrize(ops.S.matrix - ops.PAB)), sum_of(Bc, AcB, AB)),
        NullspaceEntry("N(T - PAB)", null(symmetrize(ops.T.matrix - ops.PAB)), sum_of(AcBc, AB)),
    ]
    return NullspaceReport(entries, tol)


# --------------------------------------------------------------------------
# eigenvalue correspondence


def _match_sorted(a, b) -> tuple[bool, float]:
    a, b = np.sort(np.asarray(a, float)), np.sort(np.asarray(b, float))
    if a.size != b.size:
        return False, float("inf")
    if a.size == 0:
        return True, 0.0
    return True, float(np.max(np.abs(a - b)))


@dataclass
class CorrespondenceReport:
    """Outcome of matching eigenvalues of ``P_B P_A P_B`` with those of ``(P_A+P_B)/2``."""

    pairs: list[dict]
    checks: dict[str, bool]
    residuals: dict[str, float]
    tol: float
    cluster_tol: float
    friedrichs_cos: float
    eps_act: Optional[float] = None

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values(), default=0.0)

    def failures(self) -> list[str]:
        return [k for k, v in self.checks.items() if not v]

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "pairs": self.pairs,
            "checks": self.checks,
            "residuals": self.residuals,
            "max_residual": self.max_residual,
            "tol": self.tol,
            "cluster_tol": self.cluster_tol,
            "eps_act": self.eps_act,
            "friedrichs_cos": self.friedrichs_cos,
        }


def eigenvalue_correspondence(
    A: Subspace, B: Subspace, cluster_tol: float = CLUSTER_TOL, tol: float = MATCH_TOL
) -> CorrespondenceReport:
    """Verify ``Λ#((P_A+P_B)/2) \\ {0,1/2,1} = {1/2 ± sqrt(λ)/2 : λ ∈ Λ#(P_B P_A P_B) \\ {0,1}}``.

    Multiplicities must agree cluster by cluster.  The report also checks the
    extreme values against the Friedrichs cosine, the equality of the
    nontrivial spectra of ``P_B P_A P_B`` and ``P_A P_B P_A``, the link to the
    principal cosines, and the unhalved form ``1 ± cos θ_n`` for ``P_A + P_B``.

    Raises
    ------
    OrthogonalSubspaces
        If the Friedrichs cosine vanishes.
    """
    prof = principal_angles(A, B)
    cf = prof.friedrichs_cos
    if cf <= RANK_TOL:
        raise OrthogonalSubspaces("eigenvalue correspondence needs cos(theta_F) > 0")
    ops = pair_operators(A, B)
    DS = eig_sym(ops.S, cluster_tol)
    DSp = eig_sym(ops.S_prime, cluster_tol)
    DT = eig_sym(ops.T, cluster_tol)

    def nontrivial(D, excl):
        return [c for c in D.clusters if all(abs(c.value - e) > D.abs_tol for e in excl)]

    lam_clusters = nontrivial(DS, (0.0, 1.0))
    mu_clusters = nontrivial(DT, (0.0, 0.5, 1.0))
    used = set()
    pairs = []
    checks: dict[str, bool] = {}
    residuals: dict[str, float] = {}
    bij_ok = True
    bij_res = 0.0
    for c in lam_clusters:
        root = np.sqrt(c.value)
        row = {"lambda": c.value, "multiplicity": c.multiplicity}
        for sign, key in ((1.0, "plus"), (-1.0, "minus")):
            target = 0.5 + sign * 0.5 * root
            j = int(np.argmin([abs(m.value - target) for m in mu_clusters])) if mu_clusters else -1
            if j < 0:
                bij_ok = False
                row[f"mu_{key}"] = None
                continue
            m = mu_clusters[j]
            res = abs(m.value - target)
            row[f"mu_{key}"] = m.value
            row[f"mult_{key}"] = m.multiplicity
            row[f"residual_{key}"] = res
            bij_res = max(bij_res, res)
            if res > tol or m.multiplicity != c.multiplicity or j in used:
                bij_ok = False
            used.add(j)
        pairs.append(row)
    bij_ok = bij_ok and len(used) == len(mu_clusters) and len(lam_clusters) > 0
    checks["bijection_with_multiplicity"] = bij_ok
    residuals["bijection"] = bij_res

    mus = [m.value for m in mu_clusters]
    residuals["max_mu"] = abs(max(mus) - (0.5 + 0.5 * cf)) if mus else float("inf")
    residuals["min_mu"] = abs(min(mus) - (0.5 - 0.5 * cf)) if mus else float("inf")
    checks["max_mu_is_half_plus_half_cosF"] = residuals["max_mu"] <= tol
    checks["min_mu_is_half_minus_half_cosF"] = residuals["min_mu"] <= tol

    same, res = _match_sorted(DS.multiset((0.0, 1.0)), DSp.multiset((0.0, 1.0)))
    checks["S_and_S_prime_agree"] = same and res <= tol
    residuals["S_vs_S_prime"] = res

    cos_nontrivial = prof.cosines[prof.f - 1:prof.r]
    same, res = _match_sorted(DS.multiset((0.0, 1.0)), cos_nontrivial ** 2)
    checks["lambda_are_principal_cos2"] = same and res <= tol
    residuals["lambda_vs_cos2"] = res

    Dsum = eig_sym(symmetrize(ops.PA + ops.PB), cluster_tol)
    expected = np.concatenate([1.0 + cos_nontrivial, 1.0 - cos_nontrivial])
    same, res = _match_sorted(Dsum.multiset((0.0, 1.0, 2.0)), expected)
    checks["unhalved_sum_is_one_pm_cos"] = same and res <= 2 * tol
    residuals["unhalved_sum"] = res

    return CorrespondenceReport(pairs, checks, residuals, tol, cluster_tol, cf)


def in_union(x, A: Subspace, B: Subspace, tol: float = MEMBER_TOL) -> Optional[str]:
    """``"A"`` or ``"B"`` if ``x`` belongs to that subspace, else ``None``."""
    if A.contains(x, tol):
        return "A"
    if B.contains(x, tol):
        return "B"
    return None


def map_nondegenerate(x, A: Subspace, B: Subspace, eps_act: float = EPS_ACT) -> bool:
    """True when ``||P_A P_B x - P_{A∩B} x|| > eps_act ||x||``."""
    x = np.asarray(x, dtype=float)
    AB = intersect(A, B)
    gap = A.project(B.project(x)) - AB.project(x)
    return bool(np.linalg.norm(gap) > eps_act * np.linalg.norm(x))


def active_correspondence(
    x,
    A: Subspace,
    B: Subspace,
    eps_act: float = EPS_ACT,
    cluster_tol: float = CLUSTER_TOL,
    tol: float = MATCH_TOL,
) -> CorrespondenceReport:
    """Correspondence restricted to the active spectra of a start ``x`` in ``A ∪ B``.

    Raises
    ------
    PreconditionViolated
        If ``x`` is in neither subspace; the identity can fail there.
    DegenerateStart
        If ``P_A P_B x = P_{A∩B} x`` up to ``eps_act``.
    """
    x = np.asarray(x, dtype=float)
    if in_union(x, A, B) is None:
        raise PreconditionViolated("x must belong to A or to B")
    if not map_nondegenerate(x, A, B, eps_act):
        raise DegenerateStart("P_A P_B x coincides with P_{A∩B} x")
    ops = pair_operators(A, B)
    aS = active_spectrum(eig_sym(ops.S, cluster_tol), x, eps_act)
    aSp = active_spectrum(eig_sym(ops.S_prime, cluster_tol), x, eps_act)
    aT = active_spectrum(eig_sym(ops.T, cluster_tol), x, eps_act)

    lam_S = aS.without(0.0, 1.0, tol=cluster_tol)
    lam_Sp = aSp.without(0.0, 1.0, tol=cluster_tol)
    mus = aT.without(0.0, 0.5, 1.0, tol=cluster_tol)

    def pm(lams):
        r = np.sqrt(np.asarray(lams))
        return np.concatenate([0.5 + 0.5 * r, 0.5 - 0.5 * r])

    checks, residuals = {}, {}
    same, res = _match_sorted(mus, pm(lam_S))
    checks["active_T_vs_S"] = same and res <= tol and len(lam_S) > 0
    residuals["active_T_vs_S"] = res
    same, res = _match_sorted(mus, pm(lam_Sp))
    checks["active_T_vs_S_prime"] = same and res <= tol
    residuals["active_T_vs_S_prime"] = res
    same, res = _match_sorted(lam_S, lam_Sp)
    checks["active_S_vs_S_prime"] = same and res <= tol
    residuals["active_S_vs_S_prime"] = res

    pairs = [
        {"lambda": lam, "mu_plus": 0.5 + 0.5 * np.sqrt(lam), "mu_minus": 0.5 - 0.5 * np.sqrt(lam)}
        for lam in lam_S
    ]
    return CorrespondenceReport(
        pairs, checks, residuals, tol, cluster_tol, principal_angles(A, B).friedrichs_cos, eps_act
    )


def spectra_summary(A: Subspace, B: Subspace, cluster_tol: float = CLUSTER_TOL) -> dict:
    """Clustered spectra of the three operators, for reporting."""
    ops = pair_operators(A, B)
    return {
        "PB_PA_PB": eig_sym(ops.S, cluster_tol).to_dict(),
        "PA_PB_PA": eig_sym(ops.S_prime, cluster_tol).to_dict(),
        "avg_PA_PB": eig_sym(ops.T, cluster_tol).to_dict(),
    }
