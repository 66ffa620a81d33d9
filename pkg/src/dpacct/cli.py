"""Command-line front end.

Exit status: 0 success, 2 invalid input (JSON diagnostics on stderr),
64 unknown verb, 66 file I/O failure, 1 ``selftest`` failure.
Every float is printed with 17 significant digits so that outputs round-trip
and are byte-identical across runs with the same inputs and seed.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from typing import Any, Sequence

from . import account, attack, figures, mc_oracle, selfcheck
from .accountants import rdp_to_adp, zcdp_to_delta, zcdp_to_eps
from .composition import optimal_eps
from .core import (ApproxDp, Composed, EpsDelta, Gaussian, InvalidParameter, Laplace,
                   PoissonSubsampled, PureDp, Rdp, Zcdp, loads_spec)
from .gaussian import calibrate_sigma, gaussian_delta, gaussian_eps
from .pld import DEFAULT_GRID_STEP, DEFAULT_TAIL_MASS, delta_from_pld, eps_from_pld
from .subsample import (amplify_adp, dpsgd_account, subsampled_rdp_analytic,
                        subsampled_rdp_analytic_gaussian,
                        subsampled_rdp_exact, subsampled_rdp_large_alpha)

VERBS = ("compose", "convert", "calibrate", "amplify", "dpsgd", "curve", "attack", "oracle",
         "selftest")
OUT_DIR_ENV = "DPACCT_OUT_DIR"

EXIT_OK, EXIT_FAIL, EXIT_INVALID, EXIT_USAGE, EXIT_IO = 0, 1, 2, 64, 66


class IoFailure(Exception):
    pass


# --------------------------------------------------------------------------
# formatting


def fmt(x: Any) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        if math.isnan(x):
            return "NaN"
        if math.isinf(x):
            return "Infinity" if x > 0 else "-Infinity"
        return format(x, ".17g")
    raise TypeError(type(x))


def to_json(obj: Any) -> str:
    """Deterministic JSON with sorted keys and ``%.17g`` floats."""
    if obj is None:
        return "null"
    if isinstance(obj, (bool, int, float)):
        return fmt(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        items = sorted(obj.items())
        return "{" + ", ".join(f"{json.dumps(str(k))}: {to_json(v)}" for k, v in items) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(to_json(v) for v in obj) + "]"
    if hasattr(obj, "item"):
        return to_json(obj.item())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def to_csv(header: Sequence[str], rows) -> str:
    lines = [",".join(header)]
    for r in rows:
        lines.append(",".join(v if isinstance(v, str) else
                              fmt(v if isinstance(v, (int, bool)) else float(v)) for v in r))
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# I/O


def _read_text(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc.strerror}") from exc


def _load_spec(args):
    if (args.input is None) == (args.spec is None):
        raise InvalidParameter("give exactly one of --input PATH or --spec JSON")
    text = _read_text(args.input) if args.input is not None else args.spec
    try:
        return loads_spec(text)
    except json.JSONDecodeError as exc:
        raise InvalidParameter(f"mechanism JSON does not parse: {exc.msg}") from exc


def _emit(args, text: str, default_name: str) -> None:
    path = args.output
    base = os.environ.get(OUT_DIR_ENV)
    if path is None and base:
        path = os.path.join(base, default_name)
    elif path is not None and base and not os.path.isabs(path):
        path = os.path.join(base, path)
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc.strerror}") from exc


def _emit_record(args, record: dict, name: str) -> None:
    if args.format == "csv":
        keys = sorted(record)
        _emit(args, to_csv(keys, [[record[k] for k in keys]]), name + ".csv")
    else:
        _emit(args, to_json(record) + "\n", name + ".json")


# --------------------------------------------------------------------------
# verbs


def _homogeneous(spec):
    """``(eps0, delta0, k)`` when ``spec`` composes identical (eps, delta) parts."""
    if not isinstance(spec, Composed) or not spec.parts:
        return None
    first = spec.parts[0]
    if not all(p == first for p in spec.parts) or not isinstance(first, (PureDp, ApproxDp)):
        return None
    return first.eps, getattr(first, "delta", 0.0), len(spec.parts)


def cmd_compose(args):
    spec = _load_spec(args)
    if args.method == "optimal":
        homo = _homogeneous(spec)
        if homo is None:
            raise InvalidParameter("optimal composition needs identical PureDp/ApproxDp parts")
        eps0, delta0, k = homo
        eps = optimal_eps(eps0, delta0, k, args.delta)
        out = {"eps": eps, "delta": args.delta}
    else:
        g = account.compose(spec, args.method, args.delta)
        out = {"eps": g.eps, "delta": g.delta}
    out["method"] = args.method
    _emit_record(args, out, "compose")


def cmd_convert(args):
    spec = _load_spec(args)
    if (args.eps is None) == (args.delta is None):
        raise InvalidParameter("give exactly one of --eps or --delta")
    if args.via == "pld":
        pld = account.to_pld(spec, args.grid_step, args.tail_mass)
        out = ({"eps": args.eps, "delta": float(delta_from_pld(pld, args.eps))}
               if args.eps is not None else
               {"eps": eps_from_pld(pld, args.delta), "delta": args.delta})
    elif isinstance(spec, (Gaussian, Zcdp)):
        rho = spec.rho if isinstance(spec, Zcdp) else spec.sensitivity ** 2 / (2 * spec.sigma ** 2)
        if isinstance(spec, Gaussian) and args.via == "exact":
            out = ({"eps": args.eps, "delta": gaussian_delta(rho, args.eps)}
                   if args.eps is not None else
                   {"eps": gaussian_eps(rho, args.delta), "delta": args.delta})
        elif args.eps is not None:
            d = zcdp_to_delta(rho, args.eps)
            out = {"eps": args.eps, "delta": d.optimized, "delta_loose": d.loose,
                   "vacuous": d.vacuous}
        else:
            out = {"eps": zcdp_to_eps(rho, args.delta, args.mode), "delta": args.delta}
    elif isinstance(spec, Rdp) or args.via == "rdp":
        if args.delta is None:
            raise InvalidParameter("Renyi curves convert from --delta")
        curve = spec.curve if isinstance(spec, Rdp) else account.to_rdp(spec)
        r = rdp_to_adp(curve, args.delta, args.variant)
        out = {"eps": r.eps, "delta": args.delta, "alpha": r.alpha}
    else:
        g = account.to_eps_delta(spec, "basic", args.delta if args.delta is not None else 1e-6)
        out = {"eps": g.eps, "delta": g.delta}
    _emit_record(args, out, "convert")


def cmd_calibrate(args):
    sigma = calibrate_sigma(args.sensitivity, EpsDelta(args.eps, args.delta), args.mode)
    _emit_record(args, {"sigma": sigma, "sigma_sq": sigma * sigma, "mode": args.mode},
                 "calibrate")


def _inner_rdp(inner, top: int):
    if isinstance(inner, (Gaussian, Zcdp)):
        rho = inner.rho if isinstance(inner, Zcdp) else inner.sensitivity ** 2 / (2 * inner.sigma ** 2)
        return lambda a: rho * a
    curve = account.to_rdp(inner, tuple(range(2, top + 1)))
    return lambda a: curve.at(a)


def cmd_amplify(args):
    spec = _load_spec(args)
    if not isinstance(spec, PoissonSubsampled):
        raise InvalidParameter("amplify expects a PoissonSubsampled mechanism")
    if isinstance(spec.inner, (PureDp, ApproxDp)) and args.format == "json":
        g = amplify_adp(account.to_eps_delta(spec.inner), spec.p)
        _emit(args, to_json({"eps": g.eps, "delta": g.delta}) + "\n", "amplify.json")
        return
    top = int(args.alpha_max)
    eps_fn = _inner_rdp(spec.inner, top)
    exact = subsampled_rdp_exact(eps_fn, spec.p, top)
    rows = []
    for a, e in zip(exact.orders, exact.eps_at):
        a = int(a)
        if spec.p > 1 - math.exp(-1):
            analytic = math.nan
        elif isinstance(spec.inner, (Gaussian, Zcdp)):
            analytic = subsampled_rdp_analytic_gaussian(eps_fn(1), spec.p, a)
        else:
            analytic = min(subsampled_rdp_analytic(eps_fn(2), eps_fn(w), spec.p, a, w, "log")
                           for w in range(a, top + 1))
        rows.append((a, e, analytic, subsampled_rdp_large_alpha(eps_fn(a), spec.p, a)))
    header = ("alpha", "eps_exact", "eps_analytic", "eps_large_alpha")
    if args.format == "csv":
        _emit(args, to_csv(header, rows), "amplify.csv")
    else:
        _emit(args, to_json([dict(zip(header, r)) for r in rows]) + "\n", "amplify.json")


def cmd_dpsgd(args):
    r = dpsgd_account(args.p, args.sigma, args.sensitivity, args.steps, args.delta,
                      alpha_max=args.alpha_max, variant=args.variant)
    if args.format == "csv":
        rows = list(zip(r.curve.orders, r.curve.eps_at))
        _emit(args, to_csv(("alpha", "rdp_eps"), rows), "dpsgd.csv")
    else:
        out = {"eps": r.eps, "alpha": r.alpha, "delta": args.delta, "naive_eps": r.naive_eps,
               "naive_split": r.naive_split}
        _emit(args, to_json(out) + "\n", "dpsgd.json")


def cmd_curve(args):
    if args.which == "fig1":
        header = figures.COMPOSITION_COLUMNS
        rows = figures.composition_curves(args.eps0, args.delta, args.k_max)
    elif args.which == "fig2":
        header = figures.SUBSAMPLING_COLUMNS
        rows = figures.subsampling_curves(args.p, args.rho, args.alpha_max)
    else:
        spec = _load_spec(args)
        pld = account.to_pld(spec, args.grid_step, args.tail_mass)
        n = args.points
        eps = [args.eps_max * i / (n - 1) for i in range(n)]
        header = ("eps", "delta")
        rows = list(zip(eps, (float(d) for d in delta_from_pld(pld, eps))))
    if args.format == "csv":
        _emit(args, to_csv(header, rows), f"{args.which}.csv")
    else:
        _emit(args, to_json([dict(zip(header, r)) for r in rows]) + "\n", f"{args.which}.json")


def cmd_attack(args):
    target = None
    if args.mechanism in ("gaussian", "laplace"):
        if args.eps is None:
            raise InvalidParameter(f"the {args.mechanism} mechanism needs --eps")
    if args.mechanism == "gaussian":
        if args.delta is None:
            raise InvalidParameter("the gaussian mechanism needs --delta")
        target = EpsDelta(args.eps, args.delta)
        mech = attack.gaussian_mean_mechanism(args.n, args.k, target)
    elif args.mechanism == "laplace":
        mech = Laplace(args.k / args.n, args.k / (args.n * args.eps))
    elif args.mechanism == "constant":
        mech = attack.Constant(args.value)
    else:
        mech = attack.EmpiricalMean()
    rep = attack.run_attack(attack.AttackConfig(args.n, args.k, args.trials, mech, args.seed,
                                                args.eps, args.delta))
    out = rep.to_json()
    out["mechanism"] = args.mechanism
    if isinstance(mech, (Gaussian, Laplace)):
        out["noise_scale"] = mech.sigma if isinstance(mech, Gaussian) else mech.scale
    if args.format == "csv":
        flat = {k: v for k, v in out.items() if not isinstance(v, (dict, str)) and v is not None}
        _emit_record(args, flat, "attack")
    else:
        _emit(args, to_json(out) + "\n", "attack.json")


def _sampler(obj):
    kind = obj.get("type")
    if kind == "Gaussian":
        return mc_oracle.UnitGaussianShift(float(obj.get("shift", 0.0)),
                                           float(obj.get("sigma", 1.0)))
    if kind == "Mixture":
        return mc_oracle.Mixture(float(obj["weight"]), _sampler(obj["a"]), _sampler(obj["b"]))
    raise InvalidParameter(f"unknown sampler type {kind!r}")


def _parse_sampler(text: str):
    try:
        return _sampler(json.loads(text))
    except (json.JSONDecodeError, KeyError, TypeError, AttributeError) as exc:
        raise InvalidParameter(f"bad sampler description: {exc}") from exc


def cmd_oracle(args):
    p, q = _parse_sampler(args.p_dist), _parse_sampler(args.q_dist)
    if args.which == "hockey":
        if args.eps is None:
            raise InvalidParameter("hockey needs --eps")
        est = mc_oracle.mc_hockey_stick(p, q, args.eps, args.samples, args.seed, args.form or "p")
    else:
        if args.alpha is None:
            raise InvalidParameter("renyi needs --alpha")
        est = mc_oracle.mc_renyi(p, q, args.alpha, args.samples, args.seed, args.form or "q")
    _emit_record(args, est._asdict(), "oracle")


def cmd_selftest(args):
    results = selfcheck.run_all(args.count, args.seed)
    lines = [f"{'PASS' if ok else 'FAIL'} {name} worst={fmt(float(w))}"
             for name, (ok, w) in results.items()]
    _emit(args, "\n".join(lines) + "\n", "selftest.txt")
    return EXIT_OK if all(ok for ok, _ in results.values()) else EXIT_FAIL


# --------------------------------------------------------------------------
# parser


def _common(sp, fmt_default="json"):
    sp.add_argument("-o", "--output", help="output path ('-' for stdout); relative paths "
                    f"resolve against ${OUT_DIR_ENV} when set")
    sp.add_argument("--format", choices=("csv", "json"), default=fmt_default)


def _spec_input(sp):
    sp.add_argument("--input", "-i", help="path to a mechanism JSON file")
    sp.add_argument("--spec", help="inline mechanism JSON")


def _pld_opts(sp):
    sp.add_argument("--grid-step", type=float, default=DEFAULT_GRID_STEP)
    sp.add_argument("--tail-mass", type=float, default=DEFAULT_TAIL_MASS)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dpacct", description="Privacy accounting toolkit.")
    sub = ap.add_subparsers(dest="verb", required=True)

    sp = sub.add_parser("compose", help="compose a mechanism into an (eps, delta) guarantee")
    _spec_input(sp)
    sp.add_argument("--method", choices=("basic", "advanced", "optimal", "rdp", "pld"),
                    default="basic")
    sp.add_argument("--delta", type=float, default=1e-6)
    _common(sp)
    sp.set_defaults(fn=cmd_compose)

    sp = sub.add_parser("convert", help="convert a guarantee at a given eps or delta")
    _spec_input(sp)
    sp.add_argument("--eps", type=float)
    sp.add_argument("--delta", type=float)
    sp.add_argument("--via", choices=("auto", "exact", "rdp", "pld"), default="auto",
                    help="exact uses the Gaussian closed form")
    sp.add_argument("--mode", choices=("tight", "remark"), default="tight")
    sp.add_argument("--variant", choices=("sharp", "simple"), default="sharp")
    _pld_opts(sp)
    _common(sp)
    sp.set_defaults(fn=cmd_convert)

    sp = sub.add_parser("calibrate", help="Gaussian noise scale for a target (eps, delta)")
    sp.add_argument("--sensitivity", type=float, default=1.0)
    sp.add_argument("--eps", type=float, required=True)
    sp.add_argument("--delta", type=float, required=True)
    sp.add_argument("--mode", choices=("tight", "remark"), default="tight")
    _common(sp)
    sp.set_defaults(fn=cmd_calibrate)

    sp = sub.add_parser("amplify", help="Poisson-subsampling amplification")
    _spec_input(sp)
    sp.add_argument("--alpha-max", type=int, default=64)
    _common(sp, "csv")
    sp.set_defaults(fn=cmd_amplify)

    sp = sub.add_parser("dpsgd", help="account T steps of subsampled Gaussian noise")
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--sigma", type=float, required=True)
    sp.add_argument("--sensitivity", type=float, default=1.0)
    sp.add_argument("--steps", type=int, required=True)
    sp.add_argument("--delta", type=float, required=True)
    sp.add_argument("--alpha-max", type=int, default=256)
    sp.add_argument("--variant", choices=("sharp", "simple"), default="sharp")
    _common(sp)
    sp.set_defaults(fn=cmd_dpsgd)

    sp = sub.add_parser("curve", help="export a comparison dataset")
    sp.add_argument("which", choices=("fig1", "fig2", "pld"))
    sp.add_argument("--eps0", type=float, default=0.1)
    sp.add_argument("--delta", type=float, default=1e-6)
    sp.add_argument("--k-max", type=int, default=500)
    sp.add_argument("--p", type=float, default=0.05)
    sp.add_argument("--rho", type=float, default=0.5)
    sp.add_argument("--alpha-max", type=int, default=64)
    sp.add_argument("--eps-max", type=float, default=4.0)
    sp.add_argument("--points", type=int, default=81)
    _spec_input(sp)
    _pld_opts(sp)
    _common(sp, "csv")
    sp.set_defaults(fn=cmd_curve)

    sp = sub.add_parser("attack", help="fingerprinting simulation against a mean release")
    sp.add_argument("--n", type=int, default=50)
    sp.add_argument("--k", type=int, default=500)
    sp.add_argument("--trials", type=int, default=attack.DEFAULT_TRIALS)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--mechanism", choices=("mean", "constant", "gaussian", "laplace"),
                    default="gaussian")
    sp.add_argument("--value", type=float, default=0.5, help="constant mechanism output")
    sp.add_argument("--eps", type=float)
    sp.add_argument("--delta", type=float)
    _common(sp)
    sp.set_defaults(fn=cmd_attack)

    sp = sub.add_parser("oracle", help="Monte-Carlo divergence estimate")
    sp.add_argument("which", choices=("hockey", "renyi"))
    sp.add_argument("--p-dist", required=True, help='sampler JSON, e.g. {"type": "Gaussian", '
                    '"shift": 1, "sigma": 1}')
    sp.add_argument("--q-dist", required=True)
    sp.add_argument("--eps", type=float)
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--samples", type=int, default=10_000_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--form", choices=("p", "q"))
    _common(sp)
    sp.set_defaults(fn=cmd_oracle)

    sp = sub.add_parser("selftest", help="run the randomized property suite")
    sp.add_argument("--count", type=int, default=1000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("-o", "--output")
    sp.set_defaults(fn=cmd_selftest)
    return ap


def _diagnose(kind: str, message: str) -> None:
    sys.stderr.write(to_json({"error": kind, "message": message}) + "\n")


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and not argv[0].startswith("-") and argv[0] not in VERBS:
        _diagnose("UnknownVerb", f"unknown verb {argv[0]!r}; expected one of {', '.join(VERBS)}")
        return EXIT_USAGE
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    try:
        status = args.fn(args)
    except IoFailure as exc:
        _diagnose("IoError", str(exc))
        return EXIT_IO
    except ValueError as exc:
        _diagnose(type(exc).__name__, str(exc))
        return EXIT_INVALID
    return EXIT_OK if status is None else status


if __name__ == "__main__":
    sys.exit(main())
