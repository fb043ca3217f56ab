"""The acceptance corpus: eleven end-to-end criteria over the bundled fixtures.

Each criterion is a list of checks. ``core`` checks decide pass/fail; ``extra``
checks document a corrected or transported variant next to a literal claim
that does not hold as stated.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import exprcore as ec
from . import fixtures as fx
from .curvature import (
    curvature_cached,
    identity_residuals,
    is_asd,
    is_ricci_flat,
    lax_frobenius,
    weyl_spinor,
)
from .exprcore import expr as E
from .finsler import FlagCurvature, geodesic_spray, randers_from_zermelo, unparametrized_geodesics
from .pathsys import (
    COORDS,
    beta_symmetry_dimension,
    correspondence_at_origin,
    fels,
    heavenly_residual,
    is_torsion_free,
    system_from_theta,
)
from .symmetry import is_closed_and_solvable, span_dimension, symmetry_check
from .twistor import expansion_mismatch, extract_system, null_cone, proportional, twistor_series

DEFAULT_SEED = ec.DEFAULT_SEED


@dataclass
class Check:
    name: str
    ok: bool
    detail: str = ""
    core: bool = True


@dataclass
class CriterionResult:
    number: int
    title: str
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.ok for c in self.checks if c.core)

    def add(self, name, ok, detail="", core=True):
        self.checks.append(Check(name, bool(ok), str(detail), core))
        return bool(ok)

    def failures(self) -> list:
        return [c.name for c in self.checks if c.core and not c.ok]

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        tail = "" if self.passed else "  [failed: " + ", ".join(self.failures()) + "]"
        return f"criterion {self.number:2d} {status}  {self.title}{tail}"

    def to_json(self) -> dict:
        return {
            "criterion": self.number,
            "title": self.title,
            "passed": self.passed,
            "checks": [{"name": c.name, "ok": c.ok, "core": c.core, "detail": c.detail} for c in self.checks],
        }


def _pts(box: dict, n: int, rng) -> np.ndarray:
    ctx = ec.Context(COORDS, box)
    return ctx.sample(rng, n)


# ---------------------------------------------------------------------------


def criterion_1(seed=DEFAULT_SEED, trials=20, tol=1e-8) -> CriterionResult:
    r = CriterionResult(1, "Wilczynski invariants vanish on the torsion-free suite; controls do not")
    for name in fx.TORSION_FREE + ("submax_el",):
        r.add(f"torsion-free {name}", is_torsion_free(fx.system(name), trials, tol, seed))
    for name in fx.CONTROLS:
        r.add(f"control {name} has torsion", not is_torsion_free(fx.system(name), trials, tol, seed))
    r.add("torsion-free dsym (wind +dZ geodesics)", is_torsion_free(fx.system("dsym"), trials, tol, seed), core=False)
    return r


def criterion_2(seed=DEFAULT_SEED, trials=20, tol=1e-9) -> CriterionResult:
    r = CriterionResult(2, "Fels tensor separates the trivial and submaximal systems")
    triv = fels(fx.system("trivial"))
    r.add("trivial S vanishes identically", all(c.is_zero for c in triv.symmetric.values()))
    s = fels(fx.system("submax")).component(1, 0, 0, 0)
    r.add("submax S^1_(000) = -12", s is E.num(-12), ec.to_text(s))
    return r


def criterion_3(seed=DEFAULT_SEED, trials=20, tol=1e-9) -> CriterionResult:
    r = CriterionResult(3, "heavenly potentials, Weyl spinor and Lax integrability")
    for name in ("y4", "reciprocal"):
        r.add(f"heavenly residual {name}", ec.zero_test(heavenly_residual(fx.theta(name)), fx.THETA_CTX, trials, tol, seed))
    psi = weyl_spinor(fx.theta("y4"))
    want = tuple(E.num(v) for v in (6, 0, 0, 0, 0))
    r.add("psi(y4) = (6,0,0,0,0)", psi == want, [ec.to_text(p) for p in psi])
    for name, expect in (("y4", True), ("reciprocal", True), ("x2y2", False)):
        got = lax_frobenius(fx.theta(name), trials=trials, tol=tol, seed=seed)
        r.add(f"lax frobenius {name} is {expect}", got == expect)
    return r


def criterion_4(seed=DEFAULT_SEED, trials=20, tol=1e-8) -> CriterionResult:
    r = CriterionResult(4, "curvature of the reciprocal-potential, boris and heavenly metrics")
    st = fx.metric("reciprocal")
    r.add("reciprocal Ricci-flat", is_ricci_flat(st, trials, tol, seed))
    r.add("reciprocal ASD", is_asd(st, trials, tol, seed))
    boris = fx.metric("boris")
    pack = curvature_cached(boris)
    R = pack.scalar
    ric_plus = [E.add(pack.ricci[i][j], E.mul(E.num(6), boris.g[i][j])) for i in range(4) for j in range(i, 4)]
    ric_minus = [E.sub(pack.ricci[i][j], E.mul(E.num(6), boris.g[i][j])) for i in range(4) for j in range(i, 4)]
    r.add("boris R = -24", ec.exact_is_zero(E.add(R, E.num(24))) is True, ec.to_text(R))
    r.add("boris Ric = -6 g", all(ec.exact_is_zero(e) is True for e in ric_plus))
    r.add("boris R = +24", ec.exact_is_zero(E.sub(R, E.num(24))) is True, ec.to_text(R), core=False)
    r.add("boris Ric = +6 g", all(ec.exact_is_zero(e) is True for e in ric_minus), core=False)
    r.add("boris ASD", is_asd(boris, trials, tol, seed))
    for name in ("y4", "reciprocal"):
        r.add(f"heavenly_metric({name}) Ricci-flat", is_ricci_flat(fx.metric("heavenly_" + name), trials, tol, seed))
    return r


def criterion_5(seed=DEFAULT_SEED, trials=20, tol=1e-8) -> CriterionResult:
    r = CriterionResult(5, "systems from heavenly potentials and the metric at X = 0")
    for th, name in (("y4", "submax"), ("reciprocal", "ode_reciprocal")):
        sys = system_from_theta(fx.theta(th))
        r.add(f"system_from_theta({th}) == {name}", sys.same_as(fx.system(name)), str(sys))
        m = fx.metric("heavenly_" + th)
        q = correspondence_at_origin(fx.system(name))
        r.add(f"metric at X=0 of {name} ~ heavenly({th})", proportional(q, m, m.ctx, trials, tol, seed))
    return r


def criterion_6(seed=DEFAULT_SEED, trials=20, tol=1e-6, order=8) -> CriterionResult:
    r = CriterionResult(6, "twistor series and system extraction")
    rng = np.random.default_rng(seed)
    for i in range(5):
        th = fx.random_heavenly_theta(rng)
        s = twistor_series(th, order=max(order, 4), check=False)
        bad = expansion_mismatch(s)
        r.add(f"random heavenly #{i} low orders", not bad, ec.to_text(th) + (f" mismatch {bad}" if bad else ""))
    s = twistor_series(fx.theta("y4"), order=order)
    r.add("y4 series truncates", all(s.exact_truncation), s.exact_truncation)
    pts = _pts(fx.GH_BOX, 10, rng)
    for label, fam, name in (("series(y4)", s.family(), "submax"), ("gh_yt2 curves", fx.curves("gh_yt2"), "fourdexam")):
        sys = fx.system(name)
        worst = 0.0
        for p in pts:
            got = np.array(extract_system(fam, p))
            want = ec.eval_many(sys.rhs, dict(zip(COORDS, p)))
            worst = max(worst, float(np.max(np.abs(got - want))))
        r.add(f"extract {label} reproduces {name}", worst <= tol, f"max error {worst:.3e}")
    return r


def criterion_7(seed=DEFAULT_SEED, trials=20, tol=1e-8) -> CriterionResult:
    r = CriterionResult(7, "null cones of curve families")
    for fam, met in (("boris", "boris"), ("ode_sym_4", "ode_sym_4")):
        m = fx.metric(met)
        q = null_cone(fx.curves(fam))
        r.add(f"null cone {fam} ~ metric {met}", proportional(q, m, m.ctx, trials, tol, seed), q.as_terms())
    q = null_cone(fx.curves("lines"))
    flat = fx.metric("flat")
    r.add("null cone of lines is flat", q.q == flat.g, q.as_terms())
    return r


def criterion_8(seed=DEFAULT_SEED, trials=20, tol=1e-9) -> CriterionResult:
    r = CriterionResult(8, "point symmetry algebras")
    L9 = fx.algebra("L9")
    submax = fx.system("submax")
    flags = [symmetry_check(f, submax, trials, tol, seed) for f in L9]
    r.add("literal L9 generators preserve submax", all(flags), flags)
    r.add("span L9 = 9", span_dimension(L9, trials, seed) == 9)
    r.add("L6 closed and solvable", is_closed_and_solvable(fx.algebra("L6")) == (True, True))
    r.add("L9 closed, not solvable", is_closed_and_solvable(L9) == (True, False))
    for alg, name, dim in (("L5", "fourdexam", 5), ("L4", "ode_sym_4", 4)):
        gens = fx.algebra(alg)
        flags = [symmetry_check(f, fx.system(name), trials, tol, seed) for f in gens]
        r.add(f"{alg} preserves {name}", all(flags), flags)
        r.add(f"span {alg} = {dim}", span_dimension(gens, trials, seed) == dim)
    flags = [symmetry_check(f, fx.system("submax_swapped"), trials, tol, seed) for f in L9]
    r.add("literal L9 preserves Y''=(Z')^3, Z''=0", all(flags), flags, core=False)
    flags = [symmetry_check(f, submax, trials, tol, seed) for f in fx.algebra("L9_submax")]
    r.add("transported L9 preserves submax", all(flags), flags, core=False)
    return r


def criterion_9(seed=DEFAULT_SEED, samples=1000) -> CriterionResult:
    r = CriterionResult(9, "symmetry dimension of the beta family")
    r.add("xi_3 = -2 gives 9", beta_symmetry_dimension(fx.beta("submax")) == 9)
    for k in (4, 5, 6):
        d = beta_symmetry_dimension(fx.beta(f"single_{k}"))
        r.add(f"xi_{k} = 1 gives 7", d == 7, d)
    r.add("geometric series gives 9", beta_symmetry_dimension(fx.beta("geometric")) == 9)
    r.add("quadratic gives 15", beta_symmetry_dimension(fx.beta("quadratic")) == 15)
    rng = np.random.default_rng(seed)
    dims = [beta_symmetry_dimension(fx.random_beta(rng)) for _ in range(samples)]
    r.add(f"never 8 over {samples} random families", 8 not in dims, sorted(set(dims)))
    return r


def _randers4():
    rd = randers_from_zermelo(fx.rotating_zermelo())
    return rd.finsler(fx.ROTATING_FIBER)


def criterion_10(seed=DEFAULT_SEED, trials=20, tol=1e-6) -> CriterionResult:
    r = CriterionResult(10, "Finsler: Randers geodesics, flag curvature, Euler-Lagrange")
    rng = np.random.default_rng(seed)
    F4 = _randers4()
    oracle = unparametrized_geodesics(geodesic_spray(F4))
    pts = _pts(fx.DSYM_BOX, 10, rng)
    for name, core in (("dsym_literal", True), ("dsym", False)):
        sys = fx.system(name)
        worst = 0.0
        for p in pts:
            got = np.array(oracle(*p))
            want = ec.eval_many(sys.rhs, dict(zip(COORDS, p)))
            worst = max(worst, float(np.max(np.abs(got - want) / (1 + np.abs(want)))))
        r.add(f"Randers geodesics match {name}", worst <= tol, f"max relative error {worst:.3e}", core)
    K4 = FlagCurvature(F4)
    ks = []
    base = F4.ctx.sample(rng, 10)
    for pt in base:
        for _ in range(10):
            ks.append(K4(pt[:3], pt[3:], rng.normal(size=3)))
    spread = float(np.ptp(ks))
    r.add("Randers flag curvature constant", spread <= 1e-5, f"spread {spread:.3e}, mean {np.mean(ks):.3e}")
    F5 = fx.submax_finsler()
    K5 = FlagCurvature(F5)
    worst = max(abs(K5(p[:3], p[3:], rng.normal(size=3))) for p in F5.ctx.sample(rng, 10))
    r.add("submax Finsler flag curvature vanishes", worst <= 1e-7, f"max |K| {worst:.3e}")
    el = fx.system("submax_el")
    r.add("Euler-Lagrange of the submax Lagrangian is submax", el.same_as(fx.system("submax")), str(el))
    return r


def _fd_targets():
    for name in fx.TORSION_FREE + ("submax_el", "dsym"):
        sys = fx.system(name)
        for e in sys.rhs:
            yield name, e, sys.ctx
    for name in fx.metric_names():
        m = fx.metric(name)
        for i in range(4):
            for j in range(i, 4):
                yield f"metric {name}", m.g[i][j], m.ctx
    for name in ("y4", "reciprocal"):
        yield f"theta {name}", fx.theta(name), fx.THETA_CTX
    for F in (_randers4(), fx.submax_finsler()):
        yield "finsler", F.F, F.ctx


def criterion_11(seed=DEFAULT_SEED, trials=20, tol=1e-8) -> CriterionResult:
    r = CriterionResult(11, "finite-difference cross-checks and curvature identities")
    worst = 0.0
    where = ""
    for label, e, ctx in _fd_targets():
        for v in sorted(e.free):
            gap = ec.fd_mismatch(e, v, ctx, 5, seed)
            if gap > worst:
                worst, where = gap, f"{label} d/d{v}"
    r.add("symbolic derivatives agree with finite differences", worst <= 1e-5, f"worst {worst:.2e} at {where}")
    for name in fx.metric_names():
        m = fx.metric(name)
        res = identity_residuals(curvature_cached(m))
        for kind, exprs in res.items():
            r.add(f"{name} {kind}", ec.all_zero(exprs, m.ctx, trials, tol, seed))
    return r


CRITERIA = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5, 6: criterion_6,
    7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10, 11: criterion_11,
}


def run(numbers=None, seed=DEFAULT_SEED) -> list:
    """Run the selected criteria in order; results come back sorted by number."""
    return [CRITERIA[n](seed=seed) for n in sorted(numbers or CRITERIA)]


# criteria whose literal statement does not hold; see the extra checks
KNOWN_LITERAL_FAILURES = frozenset({1, 4, 8, 10})

__all__ = ["Check", "CriterionResult", "CRITERIA", "KNOWN_LITERAL_FAILURES", "run"] + [f"criterion_{i}" for i in range(1, 12)]
