"""Command-line front end reading JSON geometry documents."""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from fractions import Fraction
from importlib import resources
from pathlib import Path

import numpy as np

from . import exprcore as ec
from .exprcore.errors import ExprSyntaxError, PathGeomError, UndeclaredVariableError
from .pathsys import COORDS, THETA_CTX, BetaFamily, SecondOrderSystem

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


# ---------------------------------------------------------------------------
# documents


def bundled_documents() -> list:
    root = resources.files("pathgeom") / "documents"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".geom"))


def load_document(path: str) -> dict:
    p = Path(path)
    if not p.exists():
        stem = p.name[:-5] if p.name.endswith(".geom") else p.name
        if stem not in bundled_documents():
            raise InputError(f"no such document: {path}")
        print(f"note: using bundled document '{stem}'", file=sys.stderr)
        text = (resources.files("pathgeom") / "documents" / f"{stem}.geom").read_text("utf-8")
    else:
        text = p.read_text("utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise InputError("a document is a JSON object")
    known = {"name", "system", "theta", "metric", "curves", "vectorfields", "zermelo", "finsler", "lagrangian", "settings"}
    unknown = set(doc) - known
    if unknown:
        raise InputError(f"unknown block(s): {', '.join(sorted(unknown))}")
    return doc


def _block(doc, name):
    if name not in doc:
        raise InputError(f"document has no '{name}' block")
    return doc[name]


def _boxes(spec) -> dict | None:
    if not spec:
        return None
    try:
        return {k: (float(v[0]), float(v[1])) for k, v in spec.items()}
    except (TypeError, ValueError, IndexError):
        raise InputError("a box maps variable names to [low, high]") from None


def _field(block, key, where):
    try:
        return block[key]
    except (KeyError, TypeError):
        raise InputError(f"block '{where}' needs '{key}'") from None


def read_system(doc) -> SecondOrderSystem:
    b = _block(doc, "system")
    return SecondOrderSystem.parse(_field(b, "F", "system"), _field(b, "G", "system"), _boxes(b.get("box")), doc.get("name", ""))


def read_theta(doc):
    b = _block(doc, "theta")
    text = b if isinstance(b, str) else _field(b, "expr", "theta")
    return ec.parse(text, THETA_CTX)


def read_metric(doc):
    from .curvature import Metric4

    b = _block(doc, "metric")
    comps = _field(b, "components", "metric")
    coords = _field(b, "coords", "metric")
    if len(coords) != 4 or len(comps) != 10:
        raise InputError("metric needs 4 coords and 10 upper-triangle components")
    return Metric4.parse(tuple(coords), comps, _boxes(b.get("box")))


def read_curves(doc):
    from .twistor import CurveFamily

    b = _block(doc, "curves")
    params = tuple(b.get("params", ("w", "z", "x", "y")))
    return CurveFamily.parse(_field(b, "Y", "curves"), _field(b, "Z", "curves"), params, b.get("seed"), _boxes(b.get("box")))


def read_fields(doc):
    from .symmetry import VectorField3

    out = []
    for entry in _block(doc, "vectorfields"):
        if not isinstance(entry, list) or len(entry) != 3:
            raise InputError("each vector field is a list of three component expressions")
        out.append(VectorField3.parse(*entry))
    return out


# ---------------------------------------------------------------------------
# commands; each returns (report, ok)


def cmd_invariants(doc, opt):
    from .pathsys import fels_report, wilczynski_report

    sys_ = read_system(doc)
    w = wilczynski_report(sys_, opt.trials, opt.tol, opt.seed)
    f = fels_report(sys_, opt.trials, opt.tol, opt.seed)
    text = f"wilczynski: {'vanishes' if w['vanishes'] else 'nonzero'}, fels: {'vanishes' if f['vanishes'] else 'nonzero'}"
    return {"system": str(sys_), "wilczynski": w, "fels": f}, True, text


def cmd_symmetry(doc, opt):
    from .symmetry import is_closed_and_solvable, span_dimension, symmetry_report

    sys_ = read_system(doc)
    fields = read_fields(doc)
    rows = symmetry_report(fields, sys_, opt.trials, opt.tol, opt.seed)
    closed, solvable = is_closed_and_solvable(fields)
    dim = span_dimension(fields, opt.trials, opt.seed)
    ok = all(r["is_symmetry"] for r in rows)
    lines = [f"generator {r['generator']}: {'symmetry' if r['is_symmetry'] else 'NOT a symmetry'}" for r in rows]
    lines.append(f"span dimension: {dim}, closed: {closed}, solvable: {solvable}")
    return {"generators": rows, "span_dimension": dim, "closed": closed, "solvable": solvable}, ok, "\n".join(lines)


def cmd_curvature(doc, opt):
    from .curvature import curvature_cached, curvature_report, identity_residuals

    m = read_metric(doc)
    rep = curvature_report(m, opt.trials, opt.tol, opt.seed)
    pack = curvature_cached(m)
    rep["scalar"] = ec.to_text(pack.scalar)
    ids = {k: ec.all_zero(v, m.ctx, opt.trials, max(opt.tol, 1e-8), opt.seed) for k, v in identity_residuals(pack).items()}
    rep["identities"] = ids
    text = (
        f"ricci-flat: {rep['ricci_flat']}, einstein lambda: {rep['einstein_lambda']}, scalar: {rep['scalar']}, "
        f"asd: {rep['asd']} (orientation {rep['orientation']})"
    )
    return rep, all(ids.values()), text


def cmd_heavenly(doc, opt):
    from .curvature import heavenly_metric, is_ricci_flat, lax_frobenius, weyl_spinor
    from .pathsys import heavenly_residual

    th = read_theta(doc)
    res = heavenly_residual(th)
    ok = ec.zero_test(res, THETA_CTX, opt.trials, opt.tol, opt.seed)
    m = heavenly_metric(th)
    rep = {
        "theta": ec.to_text(th),
        "residual": ec.to_text(res),
        "satisfies": ok,
        "metric": [ec.to_text(m.g[i][j]) for i in range(4) for j in range(i, 4)],
        "psi": [ec.to_text(p) for p in weyl_spinor(th)],
        "lax_frobenius": lax_frobenius(th, trials=opt.trials, tol=opt.tol, seed=opt.seed),
        "ricci_flat": is_ricci_flat(m, opt.trials, max(opt.tol, 1e-8), opt.seed),
    }
    text = f"heavenly: {'satisfied' if ok else 'violated'}, psi: ({', '.join(rep['psi'])}), lax: {rep['lax_frobenius']}"
    return rep, ok, text


def _sample_points(box, n, seed):
    ctx = ec.Context(COORDS, box)
    return ctx.sample(ec.evaluate.rng_for(seed), n)


def cmd_twistor(doc, opt):
    from .twistor import extract_system, null_cone, twistor_series

    rep, lines = {}, []
    fam = None
    if "theta" in doc:
        s = twistor_series(read_theta(doc), order=opt.series_order)
        rep["series"] = {"a": [ec.to_text(c) for c in s.a], "b": [ec.to_text(c) for c in s.b], "truncates": list(s.exact_truncation)}
        lines.append(f"series through X^{opt.series_order}: truncates {s.exact_truncation}")
        fam = s.family()
    if "curves" in doc:
        fam = read_curves(doc)
        try:
            q = null_cone(fam)
            rep["null_cone"] = q.as_terms()
            lines.append("null cone: " + ", ".join(f"{k}: {v}" for k, v in q.as_terms().items()))
        except PathGeomError as exc:
            rep["null_cone"] = {"error": type(exc).__name__, "message": str(exc)}
            lines.append(f"null cone: {type(exc).__name__}: {exc}")
    if fam is None:
        raise InputError("twistor needs a 'theta' or 'curves' block")
    box = _boxes(doc.get("settings", {}).get("sample_box")) or {"p0": (1.0, 2.0), "p1": (-0.5, 0.2)}
    pts = _sample_points(box, 5, opt.seed)
    ext = []
    for p in pts:
        F, G = extract_system(fam, p)
        ext.append({"point": [float(v) for v in p], "F": F, "G": G})
    rep["extracted"] = ext
    ok = True
    if "system" in doc:
        sys_ = read_system(doc)
        worst = max(
            float(np.max(np.abs(np.array([e["F"], e["G"]]) - ec.eval_many(sys_.rhs, dict(zip(COORDS, e["point"]))))))
            for e in ext
        )
        rep["max_error_vs_system"] = worst
        ok = worst <= 1e-6
        lines.append(f"extraction vs system: max error {worst:.2e}")
    return rep, ok, "\n".join(lines)


def cmd_from_theta(doc, opt):
    from .pathsys import HeavenlyViolationWarning, system_from_theta

    th = read_theta(doc)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", HeavenlyViolationWarning)
        sys_ = system_from_theta(th)
    violated = any(issubclass(w.category, HeavenlyViolationWarning) for w in caught)
    rep = {"F": ec.to_text(sys_.F), "G": ec.to_text(sys_.G), "heavenly_violated": violated}
    text = str(sys_) + ("\nwarning: potential violates the heavenly equation" if violated else "")
    return rep, not violated, text


def cmd_finsler(doc, opt):
    from .finsler import (
        FinslerFunction,
        FlagCurvature,
        ZermeloData,
        euler_lagrange,
        geodesic_spray,
        isotropy_fit,
        randers_from_zermelo,
        unparametrized_geodesics,
    )
    from .pathsys import is_torsion_free

    rep, lines, ok = {}, [], True
    F = None
    if "zermelo" in doc:
        z = doc["zermelo"]
        zd = ZermeloData.parse(_field(z, "h", "zermelo"), _field(z, "W", "zermelo"), _boxes(z.get("box")))
        rd = randers_from_zermelo(zd, opt.trials, opt.seed)
        rep["randers"] = {"b": [ec.to_text(c) for c in rd.b]}
        F = rd.finsler(_boxes(z.get("fiber_box")))
        lines.append("randers: b = (" + ", ".join(rep["randers"]["b"]) + ")")
    if "finsler" in doc:
        b = doc["finsler"]
        F = FinslerFunction.parse(b if isinstance(b, str) else _field(b, "F", "finsler"), None if isinstance(b, str) else _boxes(b.get("box")))
    if F is not None:
        S = geodesic_spray(F, verbatim=not doc.get("settings", {}).get("energy_spray", False))
        rep["spray_homogeneous"] = ec.all_zero(S.homogeneity_residuals(), F.ctx, opt.trials, max(opt.tol, 1e-8), opt.seed)
        fits = isotropy_fit(S, min(opt.trials, 10), opt.seed)
        iso = all(f["residual"] <= 1e-8 for f in fits)
        rep["isotropic"] = iso
        K = FlagCurvature(F)
        rng = np.random.default_rng(opt.seed)
        ks = [K(p[:3], p[3:], rng.normal(size=3)) for p in F.ctx.sample(rng, 10)]
        rep["flag_curvature"] = {"min": float(np.min(ks)), "max": float(np.max(ks))}
        lines.append(f"spray 2-homogeneous: {rep['spray_homogeneous']}, isotropic: {iso}")
        lines.append(f"flag curvature in [{np.min(ks):.6g}, {np.max(ks):.6g}]")
        ok = ok and rep["spray_homogeneous"]
        if "system" in doc:
            sys_ = read_system(doc)
            oracle = unparametrized_geodesics(S)
            worst = 0.0
            for p in _sample_points(dict(sys_.ctx.boxes), 10, opt.seed):
                got = np.array(oracle(*p))
                want = ec.eval_many(sys_.rhs, dict(zip(COORDS, p)))
                worst = max(worst, float(np.max(np.abs(got - want) / (1 + np.abs(want)))))
            rep["geodesic_match"] = worst
            ok = ok and worst <= 1e-6
            lines.append(f"geodesics vs system: max relative error {worst:.2e}")
    if "lagrangian" in doc:
        b = doc["lagrangian"]
        box = None if isinstance(b, str) else _boxes(b.get("box"))
        L = ec.parse(b if isinstance(b, str) else _field(b, "L", "lagrangian"), ec.Context(COORDS, box))
        el = euler_lagrange(L, box)
        tf = is_torsion_free(el, opt.trials, max(opt.tol, 1e-8), opt.seed)
        rep["euler_lagrange"] = {"F": ec.to_text(el.F), "G": ec.to_text(el.G), "torsion_free": tf}
        lines.append(f"euler-lagrange: {el}; torsion-free: {tf}")
    if not lines:
        raise InputError("finsler needs a 'zermelo', 'finsler' or 'lagrangian' block")
    return rep, ok, "\n".join(lines)


def cmd_beta_dim(opt):
    from .pathsys import beta_symmetry_dimension

    xi = {}
    for item in opt.xi or []:
        try:
            k, v = item.split("=", 1)
            xi[int(k)] = Fraction(v)
        except ValueError:
            raise InputError(f"--xi expects k=value, got {item!r}") from None
    fam = BetaFamily.from_mapping(xi, series=opt.truncation is not None, order=opt.truncation)
    d = beta_symmetry_dimension(fam)
    return {"xi": {str(k): str(v) for k, v in sorted(xi.items())}, "dimension": d}, True, f"dimension: {d}"


def cmd_fixtures(opt):
    from .acceptance import run

    nums = None
    if opt.criteria:
        try:
            nums = sorted({int(s) for s in opt.criteria.split(",")})
        except ValueError:
            raise InputError("--criteria expects a comma-separated list of numbers") from None
        if any(n not in range(1, 12) for n in nums):
            raise InputError("criteria are numbered 1 to 11")
    results = run(nums, seed=opt.seed)
    rep = {"seed": opt.seed, "criteria": [r.to_json() for r in results]}
    return rep, all(r.passed for r in results), "\n".join(r.line() for r in results)


COMMANDS = {
    "invariants": cmd_invariants,
    "symmetry": cmd_symmetry,
    "curvature": cmd_curvature,
    "heavenly": cmd_heavenly,
    "twistor": cmd_twistor,
    "from-theta": cmd_from_theta,
    "finsler": cmd_finsler,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pathgeom", description="Path geometries of pairs of second-order ODEs.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--trials", type=int, default=ec.DEFAULT_TRIALS)
    common.add_argument("--tol", type=float, default=ec.DEFAULT_TOL)
    common.add_argument("--seed", type=int, default=ec.DEFAULT_SEED)
    common.add_argument("--json", metavar="PATH", help="also write the report as JSON")
    common.add_argument("--series-order", type=int, default=8)
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        sp.add_argument("document")
    bp = sub.add_parser("beta-dim", parents=[common])
    bp.add_argument("--xi", action="append", metavar="K=V", help="coefficient of (Y')^K; repeatable")
    bp.add_argument("--truncation", type=int, help="treat the coefficients as a series known below this power")
    fp = sub.add_parser("fixtures", parents=[common])
    fp.add_argument("--criteria", help="comma-separated subset, e.g. 1,5,9")
    return p


def run_cli(argv=None, out=None) -> int:
    out = out or sys.stdout
    try:
        opt = build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    if opt.trials < 1 or opt.tol <= 0:
        print("error: --trials must be positive and --tol > 0", file=sys.stderr)
        return EXIT_INPUT
    try:
        if opt.command == "beta-dim":
            rep, ok, text = cmd_beta_dim(opt)
        elif opt.command == "fixtures":
            rep, ok, text = cmd_fixtures(opt)
        else:
            doc = load_document(opt.document)
            settings = doc.get("settings", {})
            for key in ("trials", "tol", "series_order"):
                if key in settings and f"--{key.replace('_', '-')}" not in (argv or sys.argv):
                    setattr(opt, key, type(getattr(opt, key))(settings[key]))
            rep, ok, text = COMMANDS[opt.command](doc, opt)
    except (InputError, ExprSyntaxError, UndeclaredVariableError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (PathGeomError, ArithmeticError) as exc:
        # checked before ValueError: domain errors are analysis outcomes
        print(f"analysis error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except ValueError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    rep = {"command": opt.command, "seed": opt.seed, "ok": ok, "report": rep}
    print(f"seed: {opt.seed}", file=out)
    print(text, file=out)
    if opt.json:
        Path(opt.json).write_text(json.dumps(rep, indent=2, sort_keys=True, default=str) + "\n", "utf-8")
    return EXIT_OK if ok else EXIT_FAIL


def main(argv=None) -> None:
    sys.exit(run_cli(argv))
