"""MAP and MSP iterations, their error sequences and Q-linear rates.

Both methods converge to ``P_{A∩B}(x0)``.  Every operator involved commutes
with ``P_{A∩B}``, so the error vector ``z_k = x_k - P_{A∩B}(x0)`` obeys the
same recursion as the iterate itself.  :func:`run` iterates ``z_k`` directly
and strips the (exactly zero) ``A ∩ B`` component after each step; otherwise
rounding in the limit direction would put a floor of about
``1e-16 * ||P_{A∩B} x0||`` under the measured errors.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Literal, NamedTuple, Optional

import numpy as np

from .errors import InsufficientData, InvalidInput, NotApplicable
from .spectral import CLUSTER_TOL, EPS_ACT, active_spectrum, eig_sym, pair_operators
from .subspace import Subspace, intersect

Method = Literal["MAP", "MSP"]

FLOOR = 1e-10
ONE_STEP_TOL = 1e-12
WINDOW = 5


def map_step(x, A: Subspace, B: Subspace) -> np.ndarray:
    return A.project(B.project(np.asarray(x, dtype=float)))


def msp_step(x, A: Subspace, B: Subspace) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return 0.5 * (A.project(x) + B.project(x))


_STEPS = {"MAP": map_step, "MSP": msp_step}


def _step_for(method: str):
    try:
        return _STEPS[method.upper()]
    except (KeyError, AttributeError):
        raise InvalidInput(f"unknown method {method!r}; expected 'MAP' or 'MSP'") from None


@dataclass(frozen=True, eq=False)
class IterationTrace:
    method: str
    x0: np.ndarray
    limit: np.ndarray
    errors: np.ndarray
    stopped_reason: str
    floor: float
    directions: Optional[np.ndarray] = None
    final_error_vector: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def ratios(self) -> np.ndarray:
        e = self.errors
        with np.errstate(divide="ignore", invalid="ignore"):
            r = e[1:] / e[:-1]
        return r[e[:-1] > 0]

    @property
    def iterations(self) -> int:
        return self.errors.size - 1

    def usable(self) -> np.ndarray:
        """Errors at or above ``floor * e_0``."""
        e = self.errors
        return e[e >= self.floor * e[0]] if e[0] > 0 else e[:0]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "error", "ratio", "method"])
        e = self.errors
        for k, ek in enumerate(e):
            ratio = "" if k == 0 or e[k - 1] == 0 else f"{ek / e[k - 1]:.17g}"
            w.writerow([k, f"{ek:.17g}", ratio, self.method])
        return buf.getvalue()


def run(
    method: Method,
    x0,
    A: Subspace,
    B: Subspace,
    max_iter: int = 500,
    floor: float = FLOOR,
    record_directions: bool = False,
) -> IterationTrace:
    """Iterate MAP or MSP from ``x0`` and record ``e_k = ||x_k - P_{A∩B}(x0)||``.

    Stops once ``e_k < floor * e_0``, after ``max_iter`` steps, or right after
    the first step when ``e_1 <= 1e-12 e_0`` (one-step convergence).
    """
    method = method.upper()
    step = _step_for(method)
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (A.ambient_dim,):
        raise InvalidInput(f"x0 must have shape ({A.ambient_dim},)")
    if not np.linalg.norm(x0) > 0:
        raise InvalidInput("x0 must be nonzero")
    if max_iter < 1:
        raise InvalidInput("max_iter must be at least 1")
    if not floor >= 0:
        raise InvalidInput("floor must be nonnegative")

    AB = intersect(A, B)
    limit = AB.project(x0)
    z = x0 - limit
    z = z - AB.project(z)
    errors = [float(np.linalg.norm(z))]
    dirs = [z / errors[0]] if record_directions and errors[0] > 0 else []
    reason = "budget"
    if errors[0] <= 1e-15 * np.linalg.norm(x0):
        reason = "floor"
    else:
        e0 = errors[0]
        for k in range(1, max_iter + 1):
            z = step(z, A, B)
            z = z - AB.project(z)
            ek = float(np.linalg.norm(z))
            errors.append(ek)
            if record_directions and ek > 0:
                dirs.append(z / ek)
            if k == 1 and ek <= ONE_STEP_TOL * e0:
                reason = "converged_one_step"
                break
            if ek < floor * e0:
                reason = "floor"
                break
    return IterationTrace(
        method=method,
        x0=x0,
        limit=limit,
        errors=np.array(errors),
        stopped_reason=reason,
        floor=floor,
        directions=np.array(dirs) if record_directions else None,
        final_error_vector=z,
    )


def error_sequence(method: Method, x0, A: Subspace, B: Subspace, K: int) -> np.ndarray:
    """``e_0, ..., e_K`` with no floor and no early stop."""
    step = _step_for(method)
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (A.ambient_dim,):
        raise InvalidInput(f"x0 must have shape ({A.ambient_dim},)")
    if K < 0:
        raise InvalidInput("K must be nonnegative")
    AB = intersect(A, B)
    z = x0 - AB.project(x0)
    z = z - AB.project(z)
    out = np.empty(K + 1)
    out[0] = np.linalg.norm(z)
    for k in range(1, K + 1):
        z = step(z, A, B)
        z = z - AB.project(z)
        out[k] = np.linalg.norm(z)
    return out


@dataclass
class RateReport:
    predicted_lambda: Optional[float]
    predicted_mu: Optional[float]
    degenerate: list[str] = field(default_factory=list)
    active_S: Optional[dict] = None
    active_T: Optional[dict] = None
    empirical_lambda: Optional[float] = None
    empirical_mu: Optional[float] = None
    residuals: dict = field(default_factory=dict)

    @property
    def lambda_active_value(self) -> Optional[float]:
        return self.predicted_lambda

    @property
    def mu_active_value(self) -> Optional[float]:
        return self.predicted_mu

    def to_dict(self) -> dict:
        return {
            "predicted_lambda": self.predicted_lambda,
            "predicted_mu": self.predicted_mu,
            "empirical_lambda": self.empirical_lambda,
            "empirical_mu": self.empirical_mu,
            "degenerate": self.degenerate,
            "active_PB_PA_PB": self.active_S,
            "active_avg": self.active_T,
            "residuals": self.residuals,
        }


def predicted_rates(
    x0, A: Subspace, B: Subspace, eps_act: float = EPS_ACT, cluster_tol: float = CLUSTER_TOL
) -> RateReport:
    """Q-linear rates predicted by the active spectra of ``x0``.

    ``lambda = max Λ(x0, P_B P_A P_B) \\ {0, 1}`` and
    ``mu = max Λ(x0, (P_A+P_B)/2) \\ {0, 1}``.  A method whose start is
    degenerate gets ``None`` and its name in ``degenerate``.
    """
    x0 = np.asarray(x0, dtype=float)
    nx = np.linalg.norm(x0)
    if nx == 0:
        raise InvalidInput("x0 must be nonzero")
    ops = pair_operators(A, B)
    lim = ops.AB.project(x0)
    aS = active_spectrum(eig_sym(ops.S, cluster_tol), x0, eps_act)
    aT = active_spectrum(eig_sym(ops.T, cluster_tol), x0, eps_act)
    report = RateReport(None, None, active_S=aS.to_dict(), active_T=aT.to_dict())

    if np.linalg.norm(map_step(x0, A, B) - lim) > eps_act * nx:
        lams = aS.without(0.0, 1.0, tol=cluster_tol)
        if lams:
            report.predicted_lambda = max(lams)
    if report.predicted_lambda is None:
        report.degenerate.append("MAP")

    if np.linalg.norm(msp_step(x0, A, B) - lim) > eps_act * nx:
        mus = aT.without(0.0, 1.0, tol=cluster_tol)
        if mus:
            report.predicted_mu = max(mus)
    if report.predicted_mu is None:
        report.degenerate.append("MSP")
    return report


class QRate(NamedTuple):
    rate: float
    max_deviation: float


def estimate_q_rate(trace: IterationTrace, window: int = WINDOW) -> QRate:
    """Mean of the last ``window`` consecutive error ratios above the floor."""
    if window < 1:
        raise InvalidInput("window must be positive")
    e = trace.usable()
    e = e[e > 0]
    if e.size < window + 1:
        raise InsufficientData(f"need {window + 1} errors above the floor, have {e.size}")
    r = e[-window:] / e[-window - 1:-1]
    rate = float(np.mean(r))
    return QRate(rate, float(np.max(np.abs(r - rate))))


def rate_report(
    x0,
    A: Subspace,
    B: Subspace,
    max_iter: int = 500,
    floor: float = FLOOR,
    window: int = WINDOW,
    eps_act: float = EPS_ACT,
    cluster_tol: float = CLUSTER_TOL,
) -> tuple[RateReport, IterationTrace, IterationTrace]:
    """Predicted rates together with the empirical ones from both methods."""
    rep = predicted_rates(x0, A, B, eps_act, cluster_tol)
    traces = []
    for method, attr, pred in (("MAP", "empirical_lambda", rep.predicted_lambda), ("MSP", "empirical_mu", rep.predicted_mu)):
        tr = run(method, x0, A, B, max_iter=max_iter, floor=floor)
        traces.append(tr)
        try:
            est = estimate_q_rate(tr, window)
        except InsufficientData:
            continue
        setattr(rep, attr, est.rate)
        if pred is not None:
            rep.residuals[method] = abs(est.rate - pred)
    return rep, traces[0], traces[1]


def operator_error_norms(A: Subspace, B: Subspace, k_max: int) -> tuple[list[float], list[float]]:
    """Spectral norms of ``(P_A P_B)^k - P_{A∩B}`` and ``((P_A+P_B)/2)^k - P_{A∩B}``, ``k = 1..k_max``."""
    if k_max < 1:
        raise InvalidInput("k_max must be positive")
    ops = pair_operators(A, B)
    M = ops.PA @ ops.PB
    T = ops.T.matrix
    Mk, Tk = np.eye(M.shape[0]), np.eye(M.shape[0])
    map_norms, msp_norms = [], []
    for _ in range(k_max):
        Mk = Mk @ M
        Tk = Tk @ T
        map_norms.append(float(np.linalg.norm(Mk - ops.PAB, 2)))
        msp_norms.append(float(np.linalg.norm(Tk - ops.PAB, 2)))
    return map_norms, msp_norms


def _unit_angle(a: np.ndarray, b: np.ndarray) -> float:
    return float(2.0 * np.arcsin(min(1.0, np.linalg.norm(a - b) / 2.0)))


def direction_limit(
    trace: IterationTrace,
    x0,
    A: Subspace,
    B: Subspace,
    eps_act: float = EPS_ACT,
    cluster_tol: float = CLUSTER_TOL,
    tie_tol: float = 1e-6,
) -> tuple[np.ndarray, np.ndarray, float]:
    """Compare the last normalized error vector with its predicted limit.

    The MAP limit is ``P_A v / ||P_A v||`` with ``v`` the component of ``x0``
    in ``N(lambda - P_B P_A P_B)``; the MSP limit is ``w / ||w||`` with ``w``
    the component of ``x0`` in ``N(mu - (P_A+P_B)/2)``.

    Raises
    ------
    NotApplicable
        Degenerate start, fewer than 10 usable iterations, or a runner-up
        active eigenvalue within ``tie_tol`` of the dominant one.
    """
    if trace.directions is None:
        raise InvalidInput("trace was run without record_directions=True")
    x0 = np.asarray(x0, dtype=float)
    ops = pair_operators(A, B)
    D = eig_sym(ops.S if trace.method == "MAP" else ops.T, cluster_tol)
    rates = predicted_rates(x0, A, B, eps_act, cluster_tol)
    rate = rates.predicted_lambda if trace.method == "MAP" else rates.predicted_mu
    if rate is None:
        raise NotApplicable("degenerate start has no limiting direction")
    if trace.usable().size < 11 or len(trace.directions) < 11:
        raise NotApplicable("need at least 10 usable iterations")
    active = sorted(active_spectrum(D, x0, eps_act).without(0.0, 1.0, tol=cluster_tol), reverse=True)
    if len(active) > 1 and active[0] - active[1] <= tie_tol:
        raise NotApplicable("dominant active eigenvalue is tied")

    comp = D.find(rate).project(x0)
    pred = A.project(comp) if trace.method == "MAP" else comp
    pred = pred / np.linalg.norm(pred)
    emp = trace.directions[-1]
    return emp, pred, _unit_angle(emp, pred)
