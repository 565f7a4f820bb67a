"""Command-line interface.

Every subcommand writes a JSON report to stdout (or ``--out``).  Exit codes:
0 success, 1 a requested check failed, 2 invalid input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from contextlib import nullcontext
from pathlib import Path

import numpy as np

from . import __version__
from .amplitude import amplitude_oracle, quadrature_squaring_check, transition_amplitude
from .ccr import classify, ef_block_checks, quadrature, quadrature_spectrum
from .central import (
    center_basis,
    delta_omega,
    doubled_correction_check,
    fiber_amplitude,
    integrated_amplitude,
)
from .errors import NumericalError, QuasifreeError, UnsupportedDegenerate, ValidationError
from .forms import validate_psd
from .gaussian import ProductGaussianSpec, SequenceRule, kakutani_classify, support_law_sampler
from .hs import family_from_json, hs_norms, truncation_verdict, verify_ay_bounds
from .io import InstanceError, dumps, load_instance
from .policy import numeric_policy

EXIT_OK, EXIT_CHECK, EXIT_INVALID, EXIT_NUMERIC = 0, 1, 2, 3
SUITE_CHECKS = ("spectrum", "squaring", "ef_blocks", "ay", "integral", "doubled")


class _Timer:
    def __init__(self):
        self.timings = {}

    def __call__(self, name):
        timer = self

        class _Ctx:
            def __enter__(self):
                self.t0 = time.perf_counter()

            def __exit__(self, *exc):
                timer.timings[name] = time.perf_counter() - self.t0

        return _Ctx()


def _pair(instance, spec: str | None):
    names = instance.names
    if spec is None:
        if len(names) < 2:
            raise InstanceError("instance needs two polarizations or an explicit --pair")
        a, b = names[0], names[1]
    else:
        parts = [p.strip() for p in spec.split(",")]
        if len(parts) != 2:
            raise InstanceError(f"--pair expects NAME,NAME, got {spec!r}")
        a, b = parts
    return (a, b), instance.polarization(a), instance.polarization(b)


def _vector(text: str | None, k: int) -> np.ndarray:
    if text is None:
        return np.ones(k)
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise InstanceError(f"cannot parse vector {text!r}") from exc
    if len(vals) != k:
        raise InstanceError(f"expected {k} entries, got {len(vals)}")
    return np.asarray(vals)


# ---------------------------------------------------------------- commands


def cmd_validate(args, timer):
    inst = load_instance(args.input)
    rows = {}
    ok = True
    with numeric_policy(inst.policy()):
        for name, re in inst.real_parts.items():
            s = re + 0.5j * inst.space.sigma
            rep = validate_psd(s).as_dict()
            rep["im_matches_sigma"] = True
            try:
                with timer(f"validate:{name}"):
                    pol = inst.polarization(name)
                rep["classification"] = classify(pol).as_dict()
                rep["valid"] = True
            except ValidationError as exc:
                rep["valid"] = False
                rep["error"] = f"{type(exc).__name__}: {exc}"
                ok = False
            rows[name] = rep
    return {"dim": inst.space.dim, "polarizations": rows, "passed": ok}, (EXIT_OK if ok else EXIT_INVALID)


def cmd_amplitude(args, timer):
    inst = load_instance(args.input)
    with numeric_policy(inst.policy()):
        names, s, t = _pair(inst, args.pair)
        out = {"pair": list(names)}
        with timer("theorem"):
            res = transition_amplitude(s, t)
        out.update(res.as_dict())
        if args.method in ("oracle", "both"):
            oracles = {}
            with timer("closed_form"):
                cf = amplitude_oracle(s, t, "closed_form")
            oracles["closed_form"] = cf.as_dict()
            if cf.quotient_dim <= 3:
                with timer("quadrature"):
                    oracles["quadrature"] = amplitude_oracle(s, t, "quadrature").as_dict()
            if args.mc_samples:
                with timer("monte_carlo"):
                    mc = amplitude_oracle(s, t, "monte_carlo", seed=args.seed, samples=args.mc_samples)
                oracles["monte_carlo"] = mc.as_dict()
            out["oracles"] = oracles
            out["residuals"] = dict(out["residuals"])
            out["residuals"]["oracle_closed_form"] = abs(cf.value - res.value)
            if "quadrature" in oracles:
                out["residuals"]["oracle_quadrature"] = abs(oracles["quadrature"]["value"] - res.value)
            if args.method == "oracle":
                out["value"] = cf.value
                out["method"] = "closed_form"
            ok = out["residuals"]["oracle_closed_form"] <= args.tol
            out["passed"] = ok
            return out, (EXIT_OK if ok else EXIT_CHECK)
    return out, EXIT_OK


def cmd_central(args, timer):
    inst = load_instance(args.input)
    with numeric_policy(inst.policy()):
        names, s, t = _pair(inst, args.pair)
        k = center_basis(s.space.sigma)[0].shape[1]
        omega = _vector(args.omega, k)
        checks = args.check or ["fiber", "integral", "doubled"]
        out = {"pair": list(names), "center_dim": k, "omega": omega, "checks": {}}
        ok = True
        for name in checks:
            with timer(name):
                if name == "fiber":
                    res = fiber_amplitude(s, t, omega)
                    out["checks"]["fiber"] = {**res.as_dict(), "delta_omega": delta_omega(s, t, omega)}
                elif name == "integral":
                    res = integrated_amplitude(s, t)
                    ref = transition_amplitude(s, t)
                    resid = abs(res.value - ref.value)
                    passed = resid <= max(args.tol, 1e-8)
                    ok &= passed
                    out["checks"]["integral"] = {
                        "value": res.value,
                        "transition_amplitude": ref.value,
                        "residual": resid,
                        "passed": passed,
                    }
                else:
                    rep = doubled_correction_check(s, t, omega, tol=max(args.tol, 1e-7))
                    ok &= rep.passed
                    out["checks"]["doubled"] = rep.as_dict()
        out["passed"] = ok
    return out, (EXIT_OK if ok else EXIT_CHECK)


def cmd_kakutani(args, timer):
    spec = ProductGaussianSpec(SequenceRule.parse(args.alpha_rule), SequenceRule.parse(args.beta_rule))
    with timer("classify"):
        res = kakutani_classify(spec, args.terms)
    out = {"alpha": spec.alpha.describe(), "beta": spec.beta.describe(), "terms": args.terms}
    out.update(res.as_dict())
    if args.trials:
        with timer("sampler"):
            out["support_law"] = support_law_sampler(spec, args.terms, args.trials, args.seed)
    return out, EXIT_OK


def cmd_truncate(args, timer):
    text = args.family
    path = Path(text)
    try:
        obj = json.loads(path.read_text()) if path.exists() else json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"family is not valid JSON: {exc}") from exc
    family = family_from_json(obj)
    with timer("verdict"):
        res = truncation_verdict(family, args.n_max)
    full = res.as_dict(include_sequences=True)
    out = {"family": family.description, **res.as_dict(include_sequences=args.report is None)}
    if args.report:
        Path(args.report).write_text(dumps(full) + "\n")
        out["report"] = args.report
    return out, EXIT_OK


def _suite_check(name, s, t, omega, tol):
    if name == "spectrum":
        worst = 0.0
        for pol in (s, t):
            w = quadrature_spectrum(quadrature(pol))
            worst = max(worst, float(np.max(np.min(np.abs(w[:, None] - np.array([0.0, 0.5, 1.0])), axis=1), initial=0.0)))
        return {"passed": worst <= 1e-7, "residuals": {"spectrum": worst}}
    if name == "squaring":
        return quadrature_squaring_check(s, t, tol=max(tol, 1e-7)).as_dict()
    if name == "ef_blocks":
        return ef_block_checks(quadrature(s), quadrature(t), tol=max(tol, 1e-8)).as_dict()
    if name == "ay":
        rep = verify_ay_bounds(s, t).as_dict()
        rep["hs"] = hs_norms(s, t).as_dict()
        return rep
    if name == "integral":
        res = integrated_amplitude(s, t).value
        ref = transition_amplitude(s, t).value
        return {"passed": abs(res - ref) <= 1e-8, "residuals": {"integral": abs(res - ref)}, "value": res}
    if name == "doubled":
        return doubled_correction_check(s, t, omega, tol=max(tol, 1e-7)).as_dict()
    raise InstanceError(f"unknown check {name!r}; choose from {SUITE_CHECKS}")


def cmd_suite(args, timer):
    inst = load_instance(args.input)
    checks = [c.strip() for c in args.checks.split(",")] if args.checks else list(SUITE_CHECKS)
    with numeric_policy(inst.policy()):
        names, s, t = _pair(inst, args.pair)
        k = center_basis(s.space.sigma)[0].shape[1]
        omega = _vector(args.omega, k)
        results = {}
        ok = True
        for name in checks:
            with timer(name):
                try:
                    rep = _suite_check(name, s, t, omega, args.tol)
                except (UnsupportedDegenerate, ValidationError) as exc:
                    if isinstance(exc, InstanceError):
                        raise
                    rep = {"skipped": True, "reason": f"{type(exc).__name__}: {exc}"}
            results[name] = rep
            if not rep.get("skipped"):
                ok &= bool(rep["passed"])
    return {"pair": list(names), "checks": results, "passed": ok}, (EXIT_OK if ok else EXIT_CHECK)


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=argparse.SUPPRESS, help="check tolerance (default 1e-9)")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="random seed (default 0)")
    common.add_argument("--out", default=argparse.SUPPRESS, help="write the report here instead of stdout")
    common.add_argument("--no-timings", action="store_true", default=argparse.SUPPRESS, help="omit timings")

    parser = argparse.ArgumentParser(prog="quasifree", description=__doc__.splitlines()[0], parents=[common])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="validate the polarizations of an instance")
    p.add_argument("--input", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("amplitude", parents=[common], help="transition amplitude of a pair")
    p.add_argument("--input", required=True)
    p.add_argument("--pair", help="NAME,NAME (default: first two)")
    p.add_argument("--method", choices=("theorem", "oracle", "both"), default="theorem")
    p.add_argument("--mc-samples", type=int, default=0, help="Monte Carlo samples for the oracle (0 skips)")
    p.set_defaults(func=cmd_amplitude)

    p = sub.add_parser("central", parents=[common], help="central decomposition checks")
    p.add_argument("--input", required=True)
    p.add_argument("--pair")
    p.add_argument("--omega", help="comma-separated central character (default all ones)")
    p.add_argument("--check", action="append", choices=("fiber", "integral", "doubled"))
    p.set_defaults(func=cmd_central)

    p = sub.add_parser("kakutani", parents=[common], help="product-measure dichotomy")
    p.add_argument("--alpha-rule", required=True, help="constant:c | geometric:r | pseries:p | shifted_pseries:p | array:v1,v2,...")
    p.add_argument("--beta-rule", required=True)
    p.add_argument("--terms", type=int, default=1000)
    p.add_argument("--trials", type=int, default=0, help="support-law sampler trials (0 skips)")
    p.set_defaults(func=cmd_kakutani)

    p = sub.add_parser("truncate", parents=[common], help="truncation study of a mode family")
    p.add_argument("--family", required=True, help="family JSON (file path or inline)")
    p.add_argument("--n-max", type=int, default=100)
    p.add_argument("--report", help="write full sequences to this path")
    p.set_defaults(func=cmd_truncate)

    p = sub.add_parser("suite", parents=[common], help="run the identity suite on a pair")
    p.add_argument("--input", required=True)
    p.add_argument("--pair")
    p.add_argument("--omega")
    p.add_argument("--checks", help=f"comma-separated subset of {','.join(SUITE_CHECKS)}")
    p.set_defaults(func=cmd_suite)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for name, default in (("tol", 1e-9), ("seed", 0), ("out", None), ("no_timings", False)):
        if not hasattr(args, name):
            setattr(args, name, default)
    timer = _Timer()
    try:
        result, code = args.func(args, timer)
    except ValidationError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except QuasifreeError as exc:  # pragma: no cover - every error is one of the two kinds
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    argv_echo = {k: v for k, v in vars(args).items() if k not in ("func",)}
    report = {"command": args.command, "args": argv_echo, "version": __version__, "seed": args.seed, "result": result}
    if not args.no_timings:
        report["timings"] = timer.timings
    text = dumps(report) + "\n"
    if args.out:
        with nullcontext(Path(args.out)) as path:
            path.write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
