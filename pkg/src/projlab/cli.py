"""Command line front end.

Exit codes: 0 success, 1 verification failure, 2 invalid input,
3 degenerate start.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np

from . import dynamics, scenarios, spectral
from .angles import principal_angles
from .errors import InvalidInput, NoSuchStart, OrthogonalSubspaces, ProjLabError
from .subspace import Subspace, _rng, subspaces_with_angles

EXIT_OK, EXIT_FAIL, EXIT_INVALID, EXIT_DEGENERATE = 0, 1, 2, 3
SEED_ENV = "PROJLAB_SEED"


class CLIError(Exception):
    def __init__(self, message: str, code: int = EXIT_INVALID):
        super().__init__(message)
        self.code = code


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, default=_json_default)


def write_atomic(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# --------------------------------------------------------------------------
# configuration


@dataclass
class RunConfig:
    A: Subspace
    B: Subspace
    start: Union[str, list] = "A"
    method: str = "both"
    seed: int = 0
    max_iter: int = 500
    floor: float = dynamics.FLOOR
    cluster_tol: float = spectral.CLUSTER_TOL
    eps_act: float = spectral.EPS_ACT
    K: int = scenarios.K_DEFAULT
    generator: Optional[dict] = None
    raw: dict = field(default_factory=dict)


def _load_json(path: Optional[str]) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise CLIError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise CLIError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise CLIError("config must be a JSON object")
    return data


def _seed(args, cfg: dict) -> int:
    if getattr(args, "seed", None) is not None:
        return int(args.seed)
    env = os.environ.get(SEED_ENV)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise CLIError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    return int(cfg.get("seed", 0))


def _instance(cfg: dict, seed: int) -> tuple[Subspace, Subspace, Optional[dict]]:
    inst = cfg.get("instance", cfg)
    inline = "A" in inst or "B" in inst
    gen = inst.get("generator")
    if inline == (gen is not None):
        raise CLIError("config needs exactly one instance source: inline 'A'/'B' or 'generator'")
    if inline:
        try:
            return Subspace.from_dict(inst["A"]), Subspace.from_dict(inst["B"]), None
        except KeyError as exc:
            raise CLIError(f"inline instance is missing {exc}") from exc
    try:
        g = {
            "d": int(gen["d"]),
            "angles": [float(a) for a in gen["angles"]],
            "seed": int(gen.get("seed", seed)),
            "extra_a": int(gen.get("extra_a", 0)),
            "extra_b": int(gen.get("extra_b", 0)),
        }
    except (KeyError, TypeError, ValueError) as exc:
        raise CLIError(f"malformed generator spec: {exc}") from exc
    if os.environ.get(SEED_ENV) is not None or "seed" not in gen:
        g["seed"] = seed
    A, B = subspaces_with_angles(g["d"], g["angles"], g["seed"], g["extra_a"], g["extra_b"])
    return A, B, g


def build_config(args) -> RunConfig:
    cfg = _load_json(args.config)
    seed = _seed(args, cfg)
    A, B, gen = _instance(cfg, seed)
    if A.ambient_dim != B.ambient_dim:
        raise CLIError(f"ambient dimensions differ: {A.ambient_dim} vs {B.ambient_dim}")
    rc = RunConfig(
        A=A,
        B=B,
        start=cfg.get("start", "A"),
        method=str(cfg.get("method", "both")).upper(),
        seed=seed,
        max_iter=int(cfg.get("max_iter", 500)),
        floor=float(cfg.get("floor", dynamics.FLOOR)),
        cluster_tol=float(cfg.get("cluster_tol", spectral.CLUSTER_TOL)),
        eps_act=float(cfg.get("eps_act", spectral.EPS_ACT)),
        K=int(cfg.get("K", scenarios.K_DEFAULT)),
        generator=gen,
        raw=cfg,
    )
    for attr in ("start", "method", "max_iter", "floor", "cluster_tol", "eps_act", "K"):
        val = getattr(args, attr, None)
        if val is not None:
            setattr(rc, attr, val.upper() if attr == "method" else val)
    if rc.max_iter < 1 or rc.K < 1:
        raise CLIError("max_iter and K must be at least 1")
    if not (rc.floor > 0 and rc.cluster_tol > 0 and rc.eps_act > 0):
        raise CLIError("floor, cluster_tol and eps_act must be positive")
    if rc.method not in ("MAP", "MSP", "BOTH"):
        raise CLIError(f"unknown method {rc.method!r}")
    return rc


def start_vector(rc: RunConfig) -> np.ndarray:
    s = rc.start
    if isinstance(s, list):
        x = np.asarray(s, dtype=float)
        if x.shape != (rc.A.ambient_dim,):
            raise CLIError(f"start vector must have length {rc.A.ambient_dim}")
        return x
    if s == "mu_minus":
        return scenarios.msp_beats_map_start(rc.A, rc.B, rc.eps_act, rc.cluster_tol)
    g = _rng(rc.seed ^ 0x5DEECE66D).standard_normal(rc.A.ambient_dim)
    if s == "A":
        return rc.A.project(g)
    if s == "B":
        return rc.B.project(g)
    if s == "random":
        return g
    raise CLIError(f"unknown start {s!r}; expected A, B, mu_minus, random or a vector")


def _emit(args, files: dict[str, str], stdout_key: str):
    if args.out:
        out = Path(args.out)
        for name, text in files.items():
            write_atomic(out / name, text)
    else:
        sys.stdout.write(files[stdout_key])
        if not files[stdout_key].endswith("\n"):
            sys.stdout.write("\n")


# --------------------------------------------------------------------------
# commands


def cmd_angles(args) -> int:
    rc = build_config(args)
    prof = principal_angles(rc.A, rc.B)
    _emit(args, {"angles.json": dumps(prof.to_dict())}, "angles.json")
    return EXIT_OK


def cmd_spectrum(args) -> int:
    rc = build_config(args)
    payload = {
        "angles": principal_angles(rc.A, rc.B).to_dict(),
        "spectra": spectral.spectra_summary(rc.A, rc.B, rc.cluster_tol),
    }
    _emit(args, {"spectrum.json": dumps(payload)}, "spectrum.json")
    return EXIT_OK


def cmd_run(args) -> int:
    rc = build_config(args)
    x0 = start_vector(rc)
    rates = dynamics.predicted_rates(x0, rc.A, rc.B, rc.eps_act, rc.cluster_tol)
    methods = ["MAP", "MSP"] if rc.method == "BOTH" else [rc.method]
    files, stopped = {}, {}
    rows = ["k,error,ratio,method"]
    for m in methods:
        tr = dynamics.run(m, x0, rc.A, rc.B, rc.max_iter, rc.floor)
        stopped[m] = tr.stopped_reason
        body = tr.to_csv()
        files[f"trace_{m}.csv"] = body
        rows.extend(body.splitlines()[1:])
        try:
            est = dynamics.estimate_q_rate(tr)
            setattr(rates, "empirical_lambda" if m == "MAP" else "empirical_mu", est.rate)
        except ProjLabError:
            pass
    report = rates.to_dict() | {"stopped_reason": stopped, "x0": x0}
    files["rates.json"] = dumps(report)
    files["trace.csv"] = "\n".join(rows) + "\n"
    _emit(args, files, "trace.csv")
    if args.out is None:
        sys.stderr.write(dumps(report) + "\n")
    z0 = x0 - spectral.pair_operators(rc.A, rc.B).AB.project(x0)
    if np.linalg.norm(z0) <= 1e-15 * max(1.0, float(np.linalg.norm(x0))):
        sys.stderr.write("degenerate start: x0 already lies in A ∩ B\n")
        return EXIT_DEGENERATE
    return EXIT_OK


def cmd_compare(args) -> int:
    rc = build_config(args)
    x0 = start_vector(rc)
    if rc.start == "mu_minus":
        rep = scenarios.counterexample_report(rc.A, rc.B, rc.K, x0)
    elif spectral.in_union(x0, rc.A, rc.B) is not None:
        rep = scenarios.verify_main2(rc.A, rc.B, x0, rc.K, rc.eps_act)
    else:
        rep = scenarios.compare(rc.A, rc.B, x0, rc.K)
    _emit(args, {"compare.json": dumps(rep.to_dict())}, "compare.json")
    return EXIT_OK if rep.ok else EXIT_FAIL


def verification_suite(rc: RunConfig) -> dict:
    """Every law that applies to the configured instance, with residuals."""
    A, B = rc.A, rc.B
    checks: dict[str, dict] = {}

    def record(name, passed, residual=0.0, note=""):
        checks[name] = {"pass": bool(passed), "max_residual": float(residual), "note": note}

    prof = principal_angles(A, B)
    cf = prof.friedrichs_cos
    res = 0.0
    for n, (u, v) in enumerate(prof.principal_pairs):
        c = prof.cosines[n]
        res = max(res, np.linalg.norm(A.project(v) - c * u), np.linalg.norm(B.project(u) - c * v))
    record("reciprocal_vectors", res <= 1e-10, res)

    nr = spectral.nullspace_report(A, B, rc.cluster_tol)
    record("nullspaces", nr.ok, nr.max_gap)

    k_max = 8
    map_n, msp_n = dynamics.operator_error_norms(A, B, k_max)
    ks = np.arange(1, k_max + 1)
    if cf > 0:
        res_map = float(np.max(np.abs(np.array(map_n) - cf ** (2 * ks - 1))))
    else:
        res_map = float(np.max(np.abs(map_n)))
    res_msp = float(np.max(np.abs(np.array(msp_n) - (0.5 + 0.5 * cf) ** ks)))
    record("operator_norm_map", res_map <= 1e-8, res_map)
    record("operator_norm_msp", res_msp <= 1e-8, res_msp)

    try:
        cr = spectral.eigenvalue_correspondence(A, B, rc.cluster_tol)
        record("eigenvalue_correspondence", cr.ok, cr.max_residual, ",".join(cr.failures()))
    except OrthogonalSubspaces as exc:
        record("eigenvalue_correspondence", True, 0.0, f"skipped: {exc}")

    for kind in ("A", "B"):
        x0 = start_vector(RunConfig(A, B, start=kind, seed=rc.seed))
        try:
            ac = spectral.active_correspondence(x0, A, B, rc.eps_act, rc.cluster_tol)
            record(f"active_correspondence_{kind}", ac.ok, ac.max_residual, ",".join(ac.failures()))
            rep = scenarios.verify_main2(A, B, x0, rc.K, rc.eps_act)
            record(f"map_beats_msp_from_{kind}", rep.ok, rep.residuals["mu_vs_half_plus_half_sqrt_lambda"],
                   ",".join(k for k, v in rep.checks.items() if not v))
        except ProjLabError as exc:
            record(f"active_correspondence_{kind}", True, 0.0, f"skipped: {type(exc).__name__}")

    try:
        rep = scenarios.counterexample_report(A, B, rc.K)
        record("msp_beats_map_start", rep.ok, rep.residuals["map_law_rel"],
               ",".join(k for k, v in rep.checks.items() if not v))
    except NoSuchStart as exc:
        record("msp_beats_map_start", True, 0.0, f"NoSuchStart: {exc}")

    lams = spectral.eig_sym(spectral.pair_operators(A, B).S_prime, rc.cluster_tol).multiset((0.0, 1.0))
    if lams:
        ex = scenarios.example_lambdax_case(A, B, max(lams), rc.eps_act, rc.cluster_tol)
        act = ex["active"]
        lam = ex["lambda"]
        r = np.sqrt(lam)
        ok = (
            ex["in_union"] is None
            and len(act["PB_PA_PB"].values) == 1 and abs(act["PB_PA_PB"].values[0]) <= rc.cluster_tol
            and np.allclose(sorted(act["PA_PB_PA"].values), [0.0, lam], atol=1e-9)
            and np.allclose(sorted(act["avg"].values), [0.5 - 0.5 * r, 0.5 + 0.5 * r], atol=1e-9)
        )
        record("active_spectrum_counterexample", ok, ex["split_residual"])

    return {"pass": all(c["pass"] for c in checks.values()), "friedrichs_cos": cf, "checks": checks}


def cmd_verify(args) -> int:
    rc = build_config(args)
    if isinstance(rc.start, str) and rc.start == "mu_minus":
        try:
            scenarios.msp_beats_map_start(rc.A, rc.B)
        except NoSuchStart as exc:
            sys.stderr.write(f"NoSuchStart: {exc}\n")
    result = verification_suite(rc)
    _emit(args, {"verify.json": dumps(result)}, "verify.json")
    return EXIT_OK if result["pass"] else EXIT_FAIL


def cmd_sweep(args) -> int:
    cfg = _load_json(args.config)
    spec = cfg.get("sweep", cfg)
    if args.seed is not None:
        spec = spec | {"seeds": [int(args.seed)]}
    elif os.environ.get(SEED_ENV) is not None:
        spec = spec | {"seeds": [_seed(args, {})]}
    reports = scenarios.sweep(spec, jobs=max(1, args.jobs))
    summary = scenarios.sweep_summary(reports)
    files = {
        "sweep.json": dumps({"summary": summary, "reports": [r.to_dict() for r in reports]}),
        "sweep_summary.csv": scenarios.sweep_csv(reports),
    }
    _emit(args, files, "sweep_summary.csv")
    return EXIT_OK


def cmd_gen(args) -> int:
    cfg = _load_json(args.config)
    seed = _seed(args, cfg)
    gen = cfg.get("generator", cfg.get("instance", {}).get("generator"))
    if gen is None:
        raise CLIError("gen needs a 'generator' object with d, angles and optional seed")
    A, B, g = _instance({"generator": gen | ({"seed": seed} if args.seed is not None else {})}, seed)
    payload = {"A": A.to_dict(), "B": B.to_dict(), "generated_from": g}
    _emit(args, {"instance.json": dumps(payload)}, "instance.json")
    return EXIT_OK


COMMANDS = {
    "angles": (cmd_angles, "principal angles and Dixmier/Friedrichs cosines"),
    "spectrum": (cmd_spectrum, "clustered spectra of PB PA PB, PA PB PA and (PA+PB)/2"),
    "run": (cmd_run, "run MAP and/or MSP; trace CSV and rate report"),
    "compare": (cmd_compare, "MAP vs MSP error table from one start"),
    "verify": (cmd_verify, "verification suite on one instance"),
    "sweep": (cmd_sweep, "grid of comparisons"),
    "gen": (cmd_gen, "generate an instance with prescribed principal angles"),
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="projlab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name, (_, help_) in COMMANDS.items():
        s = sub.add_parser(name, help=help_)
        s.add_argument("--config", help="JSON config file")
        s.add_argument("--seed", type=int, help=f"seed (overrides ${SEED_ENV} and the config)")
        s.add_argument("--out", help="write output files into this directory")
        s.add_argument("--jobs", type=int, default=1, help="parallel sweep cells")
        s.add_argument("--max-iter", dest="max_iter", type=int)
        s.add_argument("--floor", type=float)
        s.add_argument("--cluster-tol", dest="cluster_tol", type=float)
        s.add_argument("--eps-act", dest="eps_act", type=float)
        s.add_argument("--method", choices=["MAP", "MSP", "both"])
        s.add_argument("--start", help="A, B, mu_minus or random")
        s.add_argument("-K", dest="K", type=int, help="comparison length")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    func = COMMANDS[args.command][0]
    try:
        return func(args)
    except CLIError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return exc.code
    except InvalidInput as exc:
        sys.stderr.write(f"invalid input: {exc}\n")
        return EXIT_INVALID
    except NoSuchStart as exc:
        sys.stderr.write(f"NoSuchStart: {exc}\n")
        return EXIT_INVALID
    except ProjLabError as exc:
        name = type(exc).__name__
        sys.stderr.write(f"{name}: {exc}\n")
        return EXIT_DEGENERATE if name == "DegenerateStart" else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
