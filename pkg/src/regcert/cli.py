"""Command-line entry point.

Exit codes: 0 success, 1 validation error (machine-readable JSON on stderr),
2 indeterminate decision. All outputs are written atomically.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction

import numpy as np

from . import checkers, ensembles, estimators, harness, transforms
from .hardness import reduction_params, spark_via_oracle
from .lp import LpError
from .matio import MatrixFormatError, read_matrix_csv, write_json, write_matrix_csv, write_trials_csv
from .types import ConeSpec

SCHEMA_VERSION = "1.0"


class ValidationError(ValueError):
    def __init__(self, message: str, **detail):
        self.detail = detail
        super().__init__(message)


def _parse_q(text: str) -> float:
    if text.strip().lower() in ("inf", "infinity"):
        return math.inf
    q = float(text)
    if q < 1:
        raise ValidationError(f"q must be >= 1 or 'inf', got {text}")
    return q


def _load_matrix(path: str, exact: bool = False):
    try:
        return read_matrix_csv(path, exact=exact)
    except FileNotFoundError:
        raise ValidationError(f"file not found: {path}", path=path) from None
    except MatrixFormatError as e:
        raise ValidationError(str(e), path=path, line=e.line) from None


def _parse_alpha(text: str, exact: bool):
    try:
        frac = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ValidationError(f"bad alpha: {text!r}") from None
    return frac if exact else float(frac)


def _spec_from_args(args, p: int) -> ConeSpec:
    q = _parse_q(args.q) if getattr(args, "q", None) else 1
    exact = getattr(args, "arithmetic", "float") == "rational"
    try:
        spec = ConeSpec(s=args.s, alpha=_parse_alpha(args.alpha, exact), q=q)
        spec.validate_for_width(p)
    except ValueError as e:
        raise ValidationError(str(e)) from None
    return spec


def _model_from_json(cfg: dict) -> ensembles.PopulationModel:
    try:
        kw = dict(cfg)
        kind = kw.pop("kind")
        for key in ("d",):
            if key in kw and isinstance(kw[key], list):
                kw[key] = tuple(kw[key])
        for key in ("psi",):
            if key in kw and isinstance(kw[key], list):
                kw[key] = np.asarray(kw[key], dtype=float)
        return ensembles.PopulationModel(kind=kind, **kw)
    except (KeyError, TypeError, ValueError) as e:
        raise ValidationError(f"bad model config: {e}") from None


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ValidationError(f"file not found: {path}", path=path) from None
    except json.JSONDecodeError as e:
        raise ValidationError(f"bad JSON in {path}: {e}", path=path, line=e.lineno) from None


# ---------------------------------------------------------------------------
# subcommands


def cmd_check(args) -> int:
    exact = args.arithmetic == "rational"
    X = _load_matrix(args.matrix, exact=exact)
    p = len(X[0]) if exact else X.shape[1]
    spec = _spec_from_args(args, p)
    prop = args.property
    Xf = np.array([[float(v) for v in row] for row in X]) if exact else X
    decide_input = None
    try:
        if prop == "spark":
            value = checkers.spark(Xf)
            payload = {"property": "spark", "constant": value,
                       "full_rank": value == Xf.shape[1] + 1, "arithmetic": args.arithmetic}
        elif prop == "incoherence":
            payload = {"property": "incoherence",
                       "constant": checkers.incoherence_constant(Xf),
                       "arithmetic": "float"}
        elif prop == "rip":
            payload = checkers.rip_constant(Xf, spec.s).to_dict()
        elif prop in ("re", "compat"):
            A = Xf / math.sqrt(Xf.shape[0])
            fn = checkers.re_constant if prop == "re" else checkers.compatibility_constant
            payload = fn(A, spec, seed=args.seed or 0).to_dict()
            decide_input = X if exact else A
        elif prop == "lq":
            # with instruments: empirical cross-moment Z'X/n from the samples;
            # without: --matrix is the cross-moment matrix itself
            if args.instruments:
                Z = _load_matrix(args.instruments, exact=exact)
                if len(Z) != len(X):
                    raise ValidationError("instrument and design row counts differ")
                if exact:
                    n = len(Z)
                    Psi = [
                        [sum(Z[i][a] * X[i][b] for i in range(n)) / n for b in range(p)]
                        for a in range(len(Z[0]))
                    ]
                else:
                    Psi = Z.T @ X / X.shape[0]
            else:
                Psi = X
            payload = checkers.lq_sensitivity(
                Psi, spec, arithmetic=args.arithmetic, seed=args.seed or 0
            ).to_dict()
            decide_input = Psi
        else:  # pragma: no cover - argparse restricts choices
            raise ValidationError(f"unknown property {prop}")
    except (ValueError, checkers.BudgetExceeded) as e:
        if isinstance(e, ValidationError):
            raise
        raise ValidationError(str(e)) from None

    payload["schema_version"] = SCHEMA_VERSION
    exit_code = 0
    if args.gamma is not None:
        if prop not in ("re", "compat", "lq"):
            raise ValidationError(f"--gamma decisions apply to re/compat/lq, not {prop}")
        if exact and prop in ("re", "compat"):
            if any(v.denominator != 1 for row in X for v in row):
                raise ValidationError("rational re/compat decisions need an integer matrix")
            decide_input = np.array([[int(v) for v in row] for row in X], dtype=object)
        decision = checkers.decide(prop, decide_input, spec, args.gamma,
                                   arithmetic=args.arithmetic)
        payload["decision"] = {
            "status": decision.status,
            "gamma": float(args.gamma),
            "lower_bound": None if decision.lower_bound is None else str(decision.lower_bound),
            "upper_bound": None if decision.upper_bound is None else str(decision.upper_bound),
        }
        if decision.status == "indeterminate":
            exit_code = 2
    write_json(args.out, payload)
    return exit_code


def cmd_reduce(args) -> int:
    if args.arithmetic == "float":
        raise ValidationError("the reduction requires rational arithmetic; pass --arithmetic rational")
    rows = _load_matrix(args.matrix, exact=True)
    ints = []
    for i, row in enumerate(rows, start=1):
        for v in row:
            if v.denominator != 1:
                raise ValidationError(f"reduction needs an integer matrix; found {v} on row {i}")
        ints.append([int(v) for v in row])
    from .types import DesignMatrix

    X = DesignMatrix(np.array(ints, dtype=float), integral=True)
    p = X.values.shape[1]
    if not 0 < args.s < p:
        raise ValidationError(f"need 0 < s < p = {p}")
    prop = {"re": "re", "compat": "compatibility", "lq": "lq_sensitivity"}[args.property]
    try:
        params = reduction_params(X, args.s, prop)
        spark_le_s = spark_via_oracle(X, args.s, prop)
    except (ValueError, LpError) as e:
        raise ValidationError(str(e)) from None
    payload = {
        "schema_version": SCHEMA_VERSION,
        "property": args.property,
        "s": args.s,
        "params": params.to_dict(),
        "spark_le_s": bool(spark_le_s),
        "arithmetic": "rational",
    }
    if args.out:
        write_json(args.out, payload)
    else:
        json.dump(payload, sys.stdout, indent=2)
        print()
    return 0


def cmd_sample(args) -> int:
    cfg = _load_json(args.config)
    model = _model_from_json(cfg["model"])
    sc = dict(cfg.get("sampler", {"regime": "subgaussian"}))
    if "children" in sc:
        sc["children"] = tuple(sc["children"])
    if args.seed is not None:
        sc["seed"] = args.seed
    try:
        sampler = ensembles.SamplerSpec(**sc)
        model2 = _model_from_json(cfg["model2"]) if "model2" in cfg else None
        X, Z = ensembles.sample(model, sampler, args.n, model2=model2)
    except (KeyError, TypeError, ValueError) as e:
        raise ValidationError(f"bad sampler config: {e}") from None
    import os

    os.makedirs(args.out_dir, exist_ok=True)
    write_matrix_csv(os.path.join(args.out_dir, "X.csv"), X.values)
    write_matrix_csv(os.path.join(args.out_dir, "Z.csv"), Z.values)
    write_json(
        os.path.join(args.out_dir, "meta.json"),
        {"schema_version": SCHEMA_VERSION, "n": args.n, "seed": sampler.seed,
         "regime": sampler.regime, "model_kind": model.kind},
    )
    return 0


def cmd_transform(args) -> int:
    X = _load_matrix(args.matrix)
    if args.kind != "averaging" and args.payload is None:
        raise ValidationError(f"--payload is required for kind {args.kind!r}")
    M = _load_matrix(args.payload) if args.payload else None
    spec = _spec_from_args(args, X.shape[1])
    Z = _load_matrix(args.instruments) if args.instruments else X
    try:
        if args.kind == "additive_perturbation":
            Psi = Z.T @ X / X.shape[0]
            payload = transforms.perturbation_certificate(Psi, M, spec)
        elif args.kind == "averaging":
            X2 = _load_matrix(args.matrix2) if args.matrix2 else X
            Z2 = _load_matrix(args.instruments2) if args.instruments2 else X2
            payload = transforms.averaging_certificate(X, Z, X2, Z2, spec)
        else:
            tf = transforms.TransformSpec(kind=args.kind, payload=M)
            Xp, Zp = transforms.apply(tf, X, Z)
            before = checkers.lq_sensitivity(Z.T @ X / X.shape[0], spec)
            after = checkers.lq_sensitivity(Zp.T @ Xp / Xp.shape[0], spec)
            payload = {
                "kind": args.kind,
                "before": before.to_dict(),
                "after": after.to_dict(),
            }
    except (ValueError, AssertionError) as e:
        raise ValidationError(str(e)) from None
    payload["schema_version"] = SCHEMA_VERSION
    if args.out:
        write_json(args.out, payload)
    else:
        json.dump(payload, sys.stdout, indent=2, default=str)
        print()
    return 0


def _instance_from_json(cfg: dict) -> estimators.RegressionInstance:
    from .types import DesignMatrix, InstrumentMatrix

    try:
        X = np.asarray(cfg["X"], dtype=float)
        Z = np.asarray(cfg["Z"], dtype=float) if cfg.get("Z") is not None else X
        y = np.asarray(cfg["y"], dtype=float)
        beta = np.asarray(cfg["beta"], dtype=float) if cfg.get("beta") is not None else None
        s = int(cfg.get("s", np.count_nonzero(beta) if beta is not None else X.shape[1]))
        return estimators.RegressionInstance(
            X=DesignMatrix(X), Z=InstrumentMatrix(Z), y=y, beta_true=beta,
            sigma=float(cfg.get("sigma", 1.0)), s=s,
        )
    except (KeyError, TypeError, ValueError) as e:
        raise ValidationError(f"bad instance JSON: {e}") from None


def cmd_estimate(args) -> int:
    inst = _instance_from_json(_load_json(args.instance))
    fn = estimators.stiv if args.method == "stiv" else estimators.dantzig
    try:
        result = fn(inst, A=args.A)
    except (ValueError, LpError) as e:
        raise ValidationError(str(e)) from None
    payload = {
        "schema_version": SCHEMA_VERSION,
        "method": args.method,
        "A": args.A,
        "lambda": result.lam,
        "beta_hat": [float(b) for b in result.beta_hat],
        "feasible": result.feasible,
        "errors": result.lq_errors,
    }
    if args.out:
        write_json(args.out, payload)
    else:
        json.dump(payload, sys.stdout, indent=2)
        print()
    return 0


def cmd_rate_study(args) -> int:
    cfg = _load_json(args.config)
    model = _model_from_json(cfg["model"])
    try:
        study = estimators.error_vs_n_study(
            model,
            method=cfg.get("method", "stiv"),
            n_grid=tuple(cfg["n_grid"]),
            s=int(cfg["s"]),
            A=float(cfg.get("A", 1.0)),
            sigma=float(cfg.get("sigma", 1.0)),
            beta_magnitude=float(cfg.get("beta_magnitude", 1.0)),
            regime=cfg.get("regime", "subgaussian"),
            n_seeds=int(cfg.get("n_seeds", 20)),
            base_seed=args.seed if args.seed is not None else int(cfg.get("base_seed", 0)),
            q=cfg.get("q", "l1"),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise ValidationError(f"bad study config: {e}") from None
    import csv as csvmod
    import io

    buf = io.StringIO()
    w = csvmod.writer(buf)
    w.writerow(["n", "median_error", "q"])
    for row in study["rows"]:
        w.writerow([row["n"], repr(row["median_error"]), study["q"]])
    from .matio import _atomic_write

    _atomic_write(args.out, lambda fh: fh.write(buf.getvalue()))
    print(json.dumps({"slope": study["slope"], "out": args.out}))
    return 0


def cmd_mc(args) -> int:
    cfg = _load_json(args.config)
    mode = cfg.get("mode", "run")
    import os

    os.makedirs(args.out_dir, exist_ok=True)
    base_seed = args.seed if args.seed is not None else int(cfg.get("base_seed", 0))
    try:
        if mode == "run":
            config = harness.ExperimentConfig(
                model=_model_from_json(cfg["model"]),
                regime=cfg.get("regime", "subgaussian"),
                spec=ConeSpec(s=int(cfg["s"]), alpha=cfg.get("alpha", 1),
                              q=_parse_q(str(cfg.get("q", "1")))),
                delta=float(cfg["delta"]),
                n_grid=tuple(cfg["n_grid"]),
                trials=int(cfg.get("trials", 20)),
                base_seed=base_seed,
                r=int(cfg.get("r", 1)),
            )
            records, summary = harness.run(config)
        elif mode == "tail":
            rows = harness.deviation_tail_check(
                model=_model_from_json(cfg["model"]),
                regime=cfg.get("regime", "subgaussian"),
                n_values=cfg["n_grid"],
                t_values=cfg["t_grid"],
                trials=int(cfg.get("trials", 20)),
                base_seed=base_seed,
                r=int(cfg.get("r", 1)),
            )
            write_json(os.path.join(args.out_dir, "summary.json"),
                       {"schema_version": SCHEMA_VERSION, "mode": "tail", "rows": rows,
                        "all_valid": all(r["valid"] for r in rows)})
            return 0
        elif mode == "mixture":
            records, summary = harness.mixture_study(
                model1=_model_from_json(cfg["model"]),
                model2=_model_from_json(cfg["model2"]),
                p1=float(cfg["p1"]),
                spec=ConeSpec(s=int(cfg["s"]), alpha=cfg.get("alpha", 1),
                              q=_parse_q(str(cfg.get("q", "1")))),
                delta=float(cfg["delta"]),
                nu=float(cfg["nu"]),
                n_grid=cfg["n_grid"],
                trials=int(cfg.get("trials", 20)),
                base_seed=base_seed,
                children=tuple(cfg.get("children", ["subgaussian", "bounded"])),
            )
        else:
            raise ValidationError(f"unknown mc mode {mode!r}")
    except (KeyError, TypeError, ValueError) as e:
        if isinstance(e, ValidationError):
            raise
        raise ValidationError(f"bad mc config: {e}") from None
    summary["schema_version"] = SCHEMA_VERSION
    summary["mode"] = mode
    write_trials_csv(os.path.join(args.out_dir, "trials.csv"), records)
    write_json(os.path.join(args.out_dir, "summary.json"), summary)
    return 0


# ---------------------------------------------------------------------------
# parser / dispatch


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="regcert",
                                 description="exact certification of design-matrix regularity constants")
    ap.add_argument("--version", action="version", version=f"regcert schema {SCHEMA_VERSION}")
    def common(arithmetic_default="float"):
        # fresh parent per subparser: argparse parents share action objects,
        # so a per-subcommand default would otherwise leak across subcommands
        c = argparse.ArgumentParser(add_help=False)
        c.add_argument("--seed", type=int, default=None, help="master seed for all randomness")
        c.add_argument("--threads", type=int, default=None,
                       help="worker pool bound (computation is sequential; accepted for compatibility)")
        c.add_argument("--arithmetic", choices=["float", "rational"], default=arithmetic_default)
        return c

    sub = ap.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("check", parents=[common()], help="compute/certify one regularity constant")
    p.add_argument("--property", required=True,
                   choices=["spark", "incoherence", "rip", "re", "compat", "lq"])
    p.add_argument("--matrix", required=True)
    p.add_argument("--instruments", default=None)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--alpha", default="1", help="cone opening, exact literal (e.g. 1, 1/2, 0.5)")
    p.add_argument("--q", default=None)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("reduce", parents=[common("rational")], help="spark decision via the regularity oracle")
    p.add_argument("--matrix", required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--property", required=True, choices=["re", "compat", "lq"])
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_reduce)

    p = sub.add_parser("sample", parents=[common()], help="draw a seeded (X, Z) sample to CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(fn=cmd_sample)

    p = sub.add_parser("transform", parents=[common()], help="apply a preserving transform with certificate")
    p.add_argument("--kind", required=True,
                   choices=["orthogonal_rows", "cone_preserving_right", "linf_expansive_left",
                            "additive_perturbation", "averaging"])
    p.add_argument("--matrix", required=True)
    p.add_argument("--payload", help="transform matrix M or perturbation Delta (not used by averaging)")
    p.add_argument("--instruments", default=None)
    p.add_argument("--matrix2", default=None)
    p.add_argument("--instruments2", default=None)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--alpha", default="1", help="cone opening, exact literal (e.g. 1, 1/2, 0.5)")
    p.add_argument("--q", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_transform)

    p = sub.add_parser("estimate", parents=[common()], help="fit STIV or Dantzig on an instance")
    p.add_argument("--method", required=True, choices=["stiv", "dantzig"])
    p.add_argument("--instance", required=True)
    p.add_argument("--A", type=float, default=1.0)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_estimate)

    p = sub.add_parser("rate-study", parents=[common()], help="error-vs-n exponent study")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_rate_study)

    p = sub.add_parser("mc", parents=[common()], help="Monte Carlo sensitivity experiments")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(fn=cmd_mc)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ValidationError as e:
        json.dump({"error": str(e), **e.detail}, sys.stderr)
        sys.stderr.write("\n")
        return 1
    except checkers.BudgetExceeded as e:
        json.dump({"error": str(e), "kind": "budget"}, sys.stderr)
        sys.stderr.write("\n")
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
