"""Head-to-head comparisons of MAP and MSP.

* Starts in ``A ∪ B``: MAP strictly beats MSP at every step and
  ``mu = 1/2 + sqrt(lambda)/2``.
* ``cos θ_F > 1/2``: an eigenvector of ``(P_A+P_B)/2`` at
  ``1/2 - cos θ_F / 2`` makes MSP win at every step.
* ``cos θ_F < 1/2``: MSP loses eventually from every start.
* A start built as ``P_{B⊥}(u)`` breaks the active-spectrum correspondence.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .angles import principal_angles
from .dynamics import error_sequence, predicted_rates
from .errors import (
    DegenerateStart,
    InvalidInput,
    NoSuchStart,
    NumericalFailure,
    PreconditionViolated,
    ProjLabError,
)
from .highprec import MPPair, digits_for_growth
from .spectral import (
    CLUSTER_TOL,
    EPS_ACT,
    active_spectrum,
    eig_sym,
    in_union,
    map_nondegenerate,
    pair_operators,
)
from .subspace import Subspace, _rng, subspaces_with_angles

K_DEFAULT = 30
REL_TOL = 1e-9

START_KINDS = ("A", "B", "mu_minus", "random")


def _flag(map_e: float, msp_e: float) -> str:
    if map_e < msp_e:
        return "MAP"
    if msp_e < map_e:
        return "MSP"
    return "TIE"


@dataclass
class ComparisonReport:
    map_errors: np.ndarray
    msp_errors: np.ndarray
    predicted_lambda: Optional[float]
    predicted_mu: Optional[float]
    instance: dict = field(default_factory=dict)
    start: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    residuals: dict = field(default_factory=dict)
    note: str = ""

    @property
    def K(self) -> int:
        return self.map_errors.size - 1

    @property
    def flags(self) -> list[str]:
        return [_flag(a, x) for a, x in zip(self.map_errors[1:], self.msp_errors[1:])]

    @property
    def verdict(self) -> str:
        """Winner at the last step; ``crossover_k`` tells from when it leads."""
        f = self.flags
        if not f or f[-1] == "TIE":
            return "TIE"
        return "MAP_WINS" if f[-1] == "MAP" else "MSP_WINS"

    @property
    def crossover_k(self) -> int:
        """First ``k`` from which the final winner leads at every step up to ``K``."""
        f = self.flags
        if not f:
            return 0
        last = f[-1]
        k = len(f)
        while k > 0 and f[k - 1] == last:
            k -= 1
        return k + 1

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def table(self) -> list[tuple[int, float, float, str]]:
        return [(k + 1, float(a), float(x), fl) for k, (a, x, fl) in
                enumerate(zip(self.map_errors[1:], self.msp_errors[1:], self.flags))]

    def to_dict(self) -> dict:
        return {
            "instance": self.instance,
            "start": self.start,
            "verdict": self.verdict,
            "crossover_k": self.crossover_k,
            "predicted_lambda": self.predicted_lambda,
            "predicted_mu": self.predicted_mu,
            "checks": self.checks,
            "residuals": self.residuals,
            "note": self.note,
            "table": [{"k": k, "map_error": a, "msp_error": x, "leader": fl} for k, a, x, fl in self.table()],
        }


def _instance_info(A: Subspace, B: Subspace, **extra) -> dict:
    prof = principal_angles(A, B)
    return {"d": A.ambient_dim, "cosines": prof.cosines.tolist(), "friedrichs_cos": prof.friedrichs_cos, **extra}


def compare(A: Subspace, B: Subspace, x0, K: int = K_DEFAULT, instance=None, start=None) -> ComparisonReport:
    """Run both methods for ``K`` steps from the same start, no preconditions."""
    x0 = np.asarray(x0, dtype=float)
    rates = predicted_rates(x0, A, B)
    return ComparisonReport(
        map_errors=error_sequence("MAP", x0, A, B, K),
        msp_errors=error_sequence("MSP", x0, A, B, K),
        predicted_lambda=rates.predicted_lambda,
        predicted_mu=rates.predicted_mu,
        instance=instance if instance is not None else _instance_info(A, B),
        start=start if start is not None else {"kind": "explicit", "member_of": in_union(x0, A, B)},
    )


def verify_main2(A: Subspace, B: Subspace, x0, K: int = K_DEFAULT, eps_act: float = EPS_ACT, **kw) -> ComparisonReport:
    """MAP beats MSP step by step from a start in ``A ∪ B``.

    Checks ``msp_k > map_k > 0`` for ``k = 1..K`` and
    ``|mu - (1/2 + sqrt(lambda)/2)| <= 1e-9``.
    """
    x0 = np.asarray(x0, dtype=float)
    member = in_union(x0, A, B)
    if member is None:
        raise PreconditionViolated("start must lie in A or in B")
    if not map_nondegenerate(x0, A, B, eps_act):
        raise DegenerateStart("P_A P_B x0 coincides with P_{A∩B} x0")
    rep = compare(A, B, x0, K, start=kw.pop("start", {"kind": "explicit", "member_of": member}), **kw)
    lam, mu = rep.predicted_lambda, rep.predicted_mu
    m, s = rep.map_errors[1:], rep.msp_errors[1:]
    rep.checks["map_positive"] = bool(np.all(m > 0))
    rep.checks["msp_beats_map_strictly"] = bool(np.all(s > m))
    rel = abs(mu - (0.5 + 0.5 * math.sqrt(lam))) if lam is not None and mu is not None else float("inf")
    rep.residuals["mu_vs_half_plus_half_sqrt_lambda"] = rel
    rep.checks["mu_is_half_plus_half_sqrt_lambda"] = rel <= REL_TOL
    rep.checks["mu_gt_lambda"] = lam is not None and mu is not None and mu > lam
    rep.checks["verdict_map_wins"] = rep.verdict == "MAP_WINS" and rep.crossover_k == 1
    return rep


def msp_beats_map_start(
    A: Subspace, B: Subspace, eps_act: float = EPS_ACT, cluster_tol: float = CLUSTER_TOL
) -> np.ndarray:
    """Unit eigenvector of ``(P_A+P_B)/2`` at ``mu_- = 1/2 - cos θ_F / 2``.

    From this start ``Λ(w, (P_A+P_B)/2) = {mu_-}`` and
    ``Λ(w, P_B P_A P_B) = {0, cos² θ_F}``, so MSP converges at ``mu_-`` while
    MAP converges at ``cos² θ_F``, which is larger when ``cos θ_F > 1/2``.

    Raises
    ------
    NoSuchStart
        If ``cos θ_F <= 1/2`` (including the tie at exactly 1/2).
    """
    cf = principal_angles(A, B).friedrichs_cos
    if cf <= 0.5 + 1e-9:
        raise NoSuchStart(f"cos(theta_F) = {cf:.6g} <= 1/2; MAP is never beaten asymptotically")
    ops = pair_operators(A, B)
    DT = eig_sym(ops.T, cluster_tol)
    mu_minus = 0.5 - 0.5 * cf
    c = DT.find(mu_minus)
    if c is None:
        raise NumericalFailure("no eigenvalue of (P_A+P_B)/2 at 1/2 - cos(theta_F)/2")
    w = c.eigenbasis[:, 0].copy()
    aT = active_spectrum(DT, w, eps_act)
    aS = active_spectrum(eig_sym(ops.S, cluster_tol), w, eps_act)
    okT = len(aT.values) == 1 and abs(aT.values[0] - mu_minus) <= REL_TOL
    vals = sorted(aS.values)
    okS = len(vals) == 2 and abs(vals[0]) <= cluster_tol and abs(vals[1] - cf * cf) <= REL_TOL
    if not (okT and okS):
        raise NumericalFailure("mu_- eigenvector has unexpected active spectra")
    return w


def counterexample_report(A: Subspace, B: Subspace, K: int = K_DEFAULT, w=None) -> ComparisonReport:
    """MSP beats MAP from the ``mu_-`` start; checks ``map_k^2 = lambda^(2k-1) mu_- ||w||^2``."""
    if w is None:
        w = msp_beats_map_start(A, B)
    w = np.asarray(w, dtype=float)
    cf = principal_angles(A, B).friedrichs_cos
    lam, mu_m = cf * cf, 0.5 - 0.5 * cf
    rep = compare(A, B, w, K, start={"kind": "mu_minus"})
    k = np.arange(1, K + 1)
    nw2 = float(w @ w)
    m2 = rep.map_errors[1:] ** 2
    law = lam ** (2 * k - 1) * mu_m * nw2
    rel = float(np.max(np.abs(m2 - law) / law))
    rep.residuals["map_law_rel"] = rel
    rep.checks["map_law"] = rel <= REL_TOL
    rep.checks["map_worse_than_msp"] = bool(np.all(rep.map_errors[1:] > rep.msp_errors[1:]))
    rep.residuals["predicted_lambda"] = abs((rep.predicted_lambda or 0.0) - lam)
    rep.residuals["predicted_mu"] = abs((rep.predicted_mu or 0.0) - mu_m)
    rep.checks["rates_swap"] = rep.residuals["predicted_lambda"] <= REL_TOL and rep.residuals["predicted_mu"] <= REL_TOL
    return rep


def counterexample_law_highprec(
    d: int, angles, seed: int, K: int = K_DEFAULT, extra_a: int = 0, extra_b: int = 0
) -> dict:
    """Replay the ``mu_-`` start of a generated pair in extended precision.

    The double-precision start from :func:`msp_beats_map_start` is refined by
    inverse iteration in the extended model, then both methods are iterated
    there.  Returns the largest relative deviation of
    ``map_k^2 / msp_k^2`` from ``lambda^(2k-1) mu_- / mu_-^(2k)`` over
    ``k = 1..K`` and whether MAP trails at every step.
    """
    A, B = subspaces_with_angles(d, angles, seed, extra_a, extra_b)
    w = msp_beats_map_start(A, B)
    theta_f = min(t for t in angles if t > 0)
    cf = math.cos(theta_f)
    dps = digits_for_growth((1 + cf) / (1 - cf), K)
    pair = MPPair.from_angles(d, angles, seed, dps, extra_a, extra_b)
    ctx = pair.ctx
    cfm = ctx.cos(ctx.mpf(theta_f))
    lam, mu_m = cfm ** 2, (1 - cfm) / 2
    wm = pair.refine_eigvec(pair.vector(w), mu_m)
    map_e = pair.errors("MAP", wm, K)
    msp_e = pair.errors("MSP", wm, K)
    worst = ctx.mpf(0)
    trails = True
    for k in range(1, K + 1):
        observed = (map_e[k] / msp_e[k]) ** 2
        law = lam ** (2 * k - 1) * mu_m / mu_m ** (2 * k)
        worst = max(worst, abs(observed / law - 1))
        trails = trails and map_e[k] > msp_e[k]
    return {"max_rel_deviation": float(worst), "map_trails_every_step": trails, "dps": dps, "K": K}


def region_i_check(A: Subspace, B: Subspace, x0, span: int = 20) -> dict:
    """Eventual MAP win when ``cos θ_F < 1/2``.

    The crossover ``K0`` comes from ``map_k^2 <= lambda^(2k-1) ||x0||^2`` and
    ``msp_k^2 >= mu^(2k) ||w_mu||^2``; the errors are then compared for
    ``k = K0 .. K0 + span - 1``.
    """
    x0 = np.asarray(x0, dtype=float)
    rates = predicted_rates(x0, A, B)
    lam, mu = rates.predicted_lambda, rates.predicted_mu
    if lam is None or mu is None:
        raise DegenerateStart("start is degenerate for MAP or MSP")
    ops = pair_operators(A, B)
    w_mu = eig_sym(ops.T).find(mu).project(x0)
    z = x0 - ops.AB.project(x0)
    bound = math.log(float(w_mu @ w_mu) * lam / float(z @ z)) / (2.0 * math.log(lam / mu))
    K0 = max(1, math.floor(bound) + 1)
    m = error_sequence("MAP", x0, A, B, K0 + span - 1)[K0:]
    s = error_sequence("MSP", x0, A, B, K0 + span - 1)[K0:]
    return {
        "lambda": lam,
        "mu": mu,
        "mu_gt_lambda": mu > lam,
        "K0": K0,
        "msp_exceeds_map": bool(np.all(s > m)),
        "map_errors": m,
        "msp_errors": s,
    }


# --------------------------------------------------------------------------
# sweeps


def _start_vector(kind: str, A: Subspace, B: Subspace, seed: int) -> np.ndarray:
    g = _rng(seed ^ 0x5DEECE66D).standard_normal(A.ambient_dim)
    if kind == "A":
        return A.project(g)
    if kind == "B":
        return B.project(g)
    if kind == "random":
        return g
    raise InvalidInput(f"unknown start kind {kind!r}")


def _region(cf: float) -> str:
    if abs(cf - 0.5) <= 1e-9:
        return "cos_f=1/2"
    return "cos_f<1/2" if cf < 0.5 else "cos_f>1/2"


def validate_sweep(config: dict) -> dict:
    try:
        d = int(config["d"])
        angle_sets = [list(map(float, a)) for a in config["angle_sets"]]
        starts = list(config["starts"])
        seeds = [int(s) for s in config["seeds"]]
        K = int(config.get("K", K_DEFAULT))
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInput(f"malformed sweep spec: {exc}") from exc
    if not angle_sets or not starts or not seeds:
        raise InvalidInput("sweep grid is empty")
    if any(not a for a in angle_sets):
        raise InvalidInput("every angle set needs at least one angle")
    bad = [s for s in starts if s not in START_KINDS]
    if bad:
        raise InvalidInput(f"unknown start kinds {bad}; expected any of {START_KINDS}")
    if K < 1 or d < 1:
        raise InvalidInput("d and K must be positive")
    return {"d": d, "angle_sets": angle_sets, "starts": starts, "seeds": seeds, "K": K}


def run_cell(d: int, angles, start_kind: str, seed: int, K: int) -> ComparisonReport:
    """One sweep cell; never raises for expected region behaviour."""
    A, B = subspaces_with_angles(d, angles, seed)
    inst = _instance_info(A, B, seed=seed, angles=list(angles))
    note = ""
    kind = start_kind
    if start_kind == "mu_minus":
        try:
            w = msp_beats_map_start(A, B)
            rep = counterexample_report(A, B, K, w)
            rep.instance = inst
            rep.start = {"kind": "mu_minus"}
            return rep
        except NoSuchStart as exc:
            note = f"NoSuchStart: {exc}; fell back to an A-start"
            kind = "A"
    x0 = _start_vector(kind, A, B, seed)
    start = {"kind": start_kind, "used": kind}
    try:
        if kind in ("A", "B"):
            rep = verify_main2(A, B, x0, K, instance=inst, start=start)
        else:
            rep = compare(A, B, x0, K, instance=inst, start=start)
    except ProjLabError as exc:
        rep = compare(A, B, x0, K, instance=inst, start=start)
        note = f"{type(exc).__name__}: {exc}"
    rep.note = note
    return rep


def sweep(config: dict, jobs: int = 1) -> list[ComparisonReport]:
    """Run every ``(angles, start kind, seed)`` cell in grid order."""
    cfg = validate_sweep(config)
    cells = [
        (cfg["d"], angles, kind, seed, cfg["K"])
        for angles in cfg["angle_sets"]
        for kind in cfg["starts"]
        for seed in cfg["seeds"]
    ]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(lambda c: run_cell(*c), cells))
    return [run_cell(*c) for c in cells]


def sweep_summary(reports: list[ComparisonReport]) -> dict:
    """Verdict counts keyed by ``region`` then ``start kind``."""
    out: dict = {}
    for r in reports:
        region = _region(r.instance["friedrichs_cos"])
        kind = r.start.get("kind", "explicit")
        bucket = out.setdefault(region, {}).setdefault(kind, {"MAP_WINS": 0, "MSP_WINS": 0, "TIE": 0})
        bucket[r.verdict] += 1
    return out


def sweep_csv(reports: list[ComparisonReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["cos_f", "start_kind", "verdict", "lambda", "mu"])
    fmt = lambda v: "" if v is None else f"{v:.17g}"  # noqa: E731
    for r in reports:
        w.writerow([fmt(r.instance["friedrichs_cos"]), r.start.get("kind", ""), r.verdict,
                    fmt(r.predicted_lambda), fmt(r.predicted_mu)])
    return buf.getvalue()


# --------------------------------------------------------------------------
# active-spectrum counterexample


def example_lambdax_case(A: Subspace, B: Subspace, lam: float, eps_act: float = EPS_ACT,
                         cluster_tol: float = CLUSTER_TOL) -> dict:
    """Start ``x = P_{B⊥}(u)`` for a unit ``u`` in ``N(lam - P_A P_B P_A)``.

    Such an ``x`` is outside ``A ∪ B``.  Its active spectra are ``{0}`` for
    ``P_B P_A P_B`` and ``{0, lam}`` for ``P_A P_B P_A``, but
    ``{1/2 ± sqrt(lam)/2}`` for the average, so the correspondence fails.
    """
    if not 0.0 < lam < 1.0:
        raise InvalidInput("lambda must lie in (0, 1)")
    ops = pair_operators(A, B)
    DSp = eig_sym(ops.S_prime, cluster_tol)
    c = DSp.find(lam)
    if c is None:
        raise InvalidInput(f"{lam} is not an eigenvalue of P_A P_B P_A")
    u = c.eigenbasis[:, 0]
    x = u - B.project(u)
    root = math.sqrt(c.value)
    w_minus = 0.5 * u - B.project(u) / (2 * root)
    w_plus = 0.5 * u + B.project(u) / (2 * root)
    sets = {
        "PB_PA_PB": active_spectrum(eig_sym(ops.S, cluster_tol), x, eps_act),
        "PA_PB_PA": active_spectrum(DSp, x, eps_act),
        "avg": active_spectrum(eig_sym(ops.T, cluster_tol), x, eps_act),
    }
    return {
        "x": x,
        "u": u,
        "lambda": c.value,
        "active": sets,
        "coefficients": (1 - root, 1 + root),
        "w_plus": w_plus,
        "w_minus": w_minus,
        "split_residual": float(np.linalg.norm(x - ((1 - root) * w_plus + (1 + root) * w_minus))),
        "in_union": in_union(x, A, B),
    }
