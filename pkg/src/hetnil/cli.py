"""Command line: ``hetnil verify|anomaly|classify|wp|contract``.

Exit codes: 0 when every selected check passes (a ``discrepancy`` counts as a
pass but is flagged), 1 on any failure, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import random
import sys
from fractions import Fraction

from . import checks as C
from . import elliptic as ell
from . import hermitian as hg
from . import models as M
from .forms import render_form
from .jets import render

SCHEMA_VERSION = "1.0"
NUMERIC_DEFAULTS = {
    "t": Fraction(1), "s": Fraction(1), "lam1": Fraction(1), "lam2": Fraction(1), "lam3": Fraction(1),
    "a_inst": Fraction(1), "d_inst": Fraction(1),
}


class UsageError(Exception):
    pass


def parse_params(text: str | None) -> dict:
    """``t=1,s=1/2,u1=3`` -> rationals."""
    out = {}
    if not text:
        return out
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if "=" not in item:
            raise UsageError(f"parameter {item!r} is not of the form name=value")
        name, value = (x.strip() for x in item.split("=", 1))
        try:
            out[name] = Fraction(value)
        except (ValueError, ZeroDivisionError):
            raise UsageError(f"parameter {name} must be rational, got {value!r}") from None
    return out


def load_config(path: str | None) -> dict:
    """INI file with a ``[run]`` section (family, tolerance, instanton, profile,
    alpha_prime) and a ``[params]`` section of ``name = rational`` entries."""
    if not path:
        return {}
    cp = configparser.ConfigParser()
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    conf = dict(cp["run"]) if cp.has_section("run") else {}
    if cp.has_section("params"):
        conf["params"] = parse_params(",".join(f"{k}={v}" for k, v in cp["params"].items()))
    return conf


def _jsonable(x):
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, bool) or x is None or isinstance(x, (str, int)):
        return x
    if isinstance(x, float):
        return x
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in sorted(x.items(), key=lambda kv: str(kv[0]))}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return str(x)


def report_json(results) -> str:
    payload = {
        "schema_version": SCHEMA_VERSION,
        "checks": [
            {
                "id": r.id, "status": r.status, "kind": r.kind, "residual": _jsonable(r.residual),
                "constants": _jsonable(r.constants), "parameters": _jsonable(r.parameters),
                "details": list(r.details),
            }
            for r in results
        ],
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _fmt(x) -> str:
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, float):
        return f"{x:.3e}"
    return str(x)


def report_text(results) -> str:
    lines = []
    for r in results:
        flag = {"pass": "PASS", "fail": "FAIL", "discrepancy": "DISCREPANCY"}[r.status]
        consts = " ".join(f"{k}={_fmt(v)}" for k, v in sorted(r.constants.items()))
        lines.append(f"{flag:<12} {r.id:<17} {r.kind:<15} residual={_fmt(r.residual)}"
                     + (f"  [{consts}]" if consts else ""))
        for d in r.details:
            lines.append(f"    {d}")
    n_fail = sum(r.status == "fail" for r in results)
    n_disc = sum(r.status == "discrepancy" for r in results)
    lines.append(f"{len(results)} checks: {len(results) - n_fail - n_disc} pass, "
                 f"{n_disc} discrepancy, {n_fail} fail")
    return "\n".join(lines) + "\n"


def _emit(results, args, out) -> int:
    out.write(report_json(results) if args.json else report_text(results))
    return 1 if any(r.status == "fail" for r in results) else 0


def _settings(args) -> tuple[dict, dict]:
    conf = load_config(getattr(args, "config", None))
    params = dict(conf.get("params", {}))
    params.update(parse_params(getattr(args, "params", None)))
    for key in ("family", "tolerance", "instanton", "profile", "alpha_prime"):
        val = getattr(args, key, None)
        if val is not None:
            conf[key] = val
    return conf, params


# -- subcommands -------------------------------------------------------------------------

def cmd_verify(args, out) -> int:
    conf, params = _settings(args)
    family = conf.get("family", "h5")
    if family not in M.FAMILIES:
        raise UsageError(f"unknown family {family!r}")
    ids = args.checks or ["all"]
    allowed = C.applicable(family)
    if ids == ["all"]:
        ids = allowed
    for i in ids:
        if i not in C.CHECKS:
            raise UsageError(f"unknown check {i!r}; known: {', '.join(C.CHECKS)}")
        if i not in allowed:
            raise UsageError(f"check {i!r} is tied to h5 and cannot run on family {family!r}")
    ctx = C.Context(family=family, params=params, tolerance=float(conf.get("tolerance", 1e-8)))
    try:
        results = C.run(ids, ctx)
    except (M.ParameterError, hg.PreconditionError) as exc:
        raise UsageError(str(exc)) from None
    return _emit(results, args, out)


def _profile_setup(profile, params, ap):
    """Defaults completed so that ``profile`` is a candidate solution.

    The inverse-square branch carries no instanton mass (``a_inst = 0``); the
    quadratic branch uses the twin instanton ``(a_inst, d_inst) = (t, s)``.
    """
    p = dict(NUMERIC_DEFAULTS)
    p.update({k: v for k, v in params.items() if k in ("t", "s")})
    if profile == "inverse-square":
        p["a_inst"] = Fraction(0)
    elif profile == "quadratic":
        p["a_inst"], p["d_inst"] = p["t"], p["s"]
    p.update(params)
    p["alphap"] = ap
    return p


def cmd_anomaly(args, out) -> int:
    conf, params = _settings(args)
    kind = conf.get("instanton", "A_ad")
    if kind not in ("A_ad", "A_lambda"):
        raise UsageError("--instanton must be A_ad or A_lambda")
    ap_text = conf.get("alpha_prime")
    profile = conf.get("profile")
    tol = float(conf.get("tolerance", 1e-8))
    try:
        ap = Fraction(ap_text) if ap_text is not None else None
    except ValueError:
        raise UsageError(f"--alpha-prime must be rational, got {ap_text!r}") from None
    if profile is None:
        return _anomaly_symbolic(kind, params, ap, args, out)
    if profile not in ell.PROFILES:
        raise UsageError(f"unknown profile {profile!r}")
    if profile == "weierstrass":
        return _anomaly_weierstrass(kind, params, args, out, tol)
    if ap is None:
        ap = Fraction(1, 3)
    p = _profile_setup(profile, params, ap)
    inst = {k: p[k] for k in (("a_inst", "d_inst") if kind == "A_ad" else ("lam1", "lam2", "lam3"))}
    alg = M.build_family("h5", s=p["s"], t=p["t"])
    expr = M.anomaly_residual(M.AnomalySetup(alg, M.InstantonSpec(kind, inst), ap))
    rng = random.Random(C.Context().seed)
    if profile == "inverse-square":
        pts = C.rational_points(rng, 50)
        prof = {"alphap": ap}
    elif profile == "quadratic":
        pts = C.rational_points(rng, 50, radius=1)
        prof = {"a_inst": p["a_inst"], "d_inst": p["d_inst"]}
    else:
        pts = C.rational_points(rng, 5)
        prof = {}
    worst = Fraction(0)
    for x in pts:
        jet = ell.profile_jet(profile, x, params=prof)
        v = abs(expr.evaluate(jet, {}, exact=True))
        worst = max(worst, v)
    status = C.PASS if worst == 0 else C.FAIL
    res = C.CheckResult("anomaly", status, C.EXACT, worst, {"points": len(pts)},
                        {**{k: p[k] for k in sorted(p)}, "instanton": kind, "profile": profile})
    return _emit([res], args, out)


def _anomaly_symbolic(kind, params, ap, args, out) -> int:
    alg = M.build_family("h5", s=params.get("s", "s"), t=params.get("t", "t"))
    inst = {k: v for k, v in params.items() if k in ("a_inst", "d_inst", "lam1", "lam2", "lam3")}
    ap_val = ap if ap is not None else "alphap"
    expr = M.anomaly_residual(M.AnomalySetup(alg, M.InstantonSpec(kind, inst), ap_val))
    details = [f"e1234 coefficient: {render(expr)}"]
    status = C.PASS
    if kind == "A_ad":
        want = C._subs(M.expected_ad_anomaly(M._p(ap_val), -12), params)
        if expr != want:
            status = C.FAIL
            details.append("does not factor as -[Lap e^2f + 8t^2k^2 - 3a'(t^2k^2 - a^2tau^2) Lap e^-2f]")
    res = C.CheckResult("anomaly", status, C.EXACT, 0 if status == C.PASS else 1, {"p11_constant": -12},
                        {**params, "instanton": kind, **({"alphap": ap} if ap is not None else {})}, details)
    return _emit([res], args, out)


def _anomaly_weierstrass(kind, params, args, out, tol) -> int:
    if kind != "A_lambda":
        raise UsageError("the Weierstrass profile solves the anomaly with --instanton A_lambda")
    aW = float(params.get("aW", 2))
    alpha = float(params.get("alpha", 1))
    p = ell.eqcan_parameters(aW, alpha, float(params.get("t", 1)))
    tau = ell.half_period(aW)
    grid = [(0.1 * tau + 1.8 * tau * i / 199,) for i in range(200)]
    # the full anomaly residual, restricted to one variable, under the balancing of constants
    alg = M.build_family("h5")
    expr = M.one_dimensional(M.anomaly_residual(M.AnomalySetup(alg, M.InstantonSpec("A_lambda"), balanced=True)))
    worst = 0.0
    for x in grid:
        jet = ell.profile_jet("weierstrass", x, params=p)
        worst = max(worst, abs(expr.evaluate(jet, p, exact=False)))
    status = C.PASS if worst < tol else C.FAIL
    res = C.CheckResult("anomaly", status, C.NUMERIC, worst, {"tau": tau},
                        {**{k: p[k] for k in sorted(p)}, "instanton": kind, "profile": "weierstrass"})
    return _emit([res], args, out)


def cmd_classify(args, out) -> int:
    conf, params = _settings(args)
    family = conf.get("family", "h5")
    try:
        alg = M.build_family(family, **params)
    except M.ParameterError as exc:
        raise UsageError(str(exc)) from None
    c = M.classify(alg)
    if args.json:
        out.write(json.dumps({"schema_version": SCHEMA_VERSION, "family": family,
                              "parameters": _jsonable(params), "asd": c.asd, "abelian": c.abelian},
                             indent=2, sort_keys=True) + "\n")
    else:
        for k in (5, 6):
            out.write(f"de{k} = {render_form(alg.structure(k))}\n")
        out.write(f"asd={str(c.asd).lower()} abelian={str(c.abelian).lower()}\n")
    return 0 if c.asd == c.abelian else 1


def cmd_wp(args, out) -> int:
    conf, params = _settings(args)
    aW = float(args.aw if args.aw is not None else params.get("aW", 1))
    if not aW > 0:
        raise UsageError("--aw must be positive")
    tau = ell.half_period(aW)
    if args.z:
        zs = [float(Fraction(z)) for z in args.z.split(",")]
    else:
        n = args.points
        zs = [2 * tau * (i + 1) / (n + 1) for i in range(n)]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["z", "P", "dP", "residual"])
    worst = 0.0
    for z in zs:
        try:
            p, dp = ell.wp_eval(z, aW)
        except ell.DomainError as exc:
            raise UsageError(str(exc)) from None
        r = ell.ode_residual(p, dp, aW)
        worst = max(worst, r)
        w.writerow([repr(z), repr(p), repr(dp), f"{r:.3e}"])
    out.write(buf.getvalue())
    tol = float(conf.get("tolerance", 1e-10))
    return 0 if worst < tol else 1


def cmd_contract(args, out) -> int:
    conf, params = _settings(args)
    t = params.get("t", "t")
    h5 = M.build_family("h5", s="s", t=t)
    h3 = M.contract_to_h3(h5)
    S = hg.standard_su3()
    for k in (5, 6):
        out.write(f"h5: de{k} = {render_form(h5.structure(k))}\n")
    for k in (5, 6):
        out.write(f"h3: de{k} = {render_form(h3.structure(k))}\n")
    out.write(f"h3 torsion = {render_form(hg.torsion(S, h3))}\n")
    res = C.check_contraction(C.Context(params=params))
    out.write(report_json([res]) if args.json else report_text([res]))
    return 0 if res.status != C.FAIL else 1


# -- parser ------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hetnil", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, family=True):
        if family:
            p.add_argument("--family", choices=M.FAMILIES)
        p.add_argument("--params", help="comma separated name=rational list, e.g. t=1,s=1/2")
        p.add_argument("--config", help="INI file with [run] and [params] sections")
        p.add_argument("--json", action="store_true", help="emit the versioned JSON report")
        p.add_argument("--tolerance", type=float, help="numeric tolerance")

    p = sub.add_parser("verify", help="run named checks (or 'all')")
    p.add_argument("checks", nargs="*", metavar="CHECK", help="check ids: " + ", ".join(C.CHECKS))
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("anomaly", help="anomaly cancellation residual")
    p.add_argument("--instanton", choices=("A_ad", "A_lambda"))
    p.add_argument("--profile", choices=ell.PROFILES)
    p.add_argument("--alpha-prime", dest="alpha_prime")
    common(p, family=False)
    p.set_defaults(func=cmd_anomaly)

    p = sub.add_parser("classify", help="ASD curvature vs abelian complex structure")
    common(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("wp", help="table of the real Weierstrass function as CSV")
    p.add_argument("--aw", type=float, help="root parameter a (default 1)")
    p.add_argument("--points", type=int, default=20)
    p.add_argument("--z", help="comma separated evaluation points")
    common(p, family=False)
    p.set_defaults(func=cmd_wp)

    p = sub.add_parser("contract", help="contraction of h5 to h3")
    common(p, family=False)
    p.set_defaults(func=cmd_contract)
    return ap


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        return args.func(args, out)
    except UsageError as exc:
        sys.stderr.write(f"hetnil: error: {exc}\n")
        return 2


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    main_entry()
