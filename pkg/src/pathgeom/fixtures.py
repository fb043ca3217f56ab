"""Named geometries used by the acceptance suite, the tests and the CLI."""

from __future__ import annotations

from fractions import Fraction
from functools import cache

import numpy as np

from . import exprcore as ec
from .curvature import GH_COORDS, GHData, Metric4, heavenly_metric
from .exprcore import expr as E
from .finsler import FinslerFunction, ZermeloData, euler_lagrange
from .pathsys import COORDS, THETA_CTX, BetaFamily, SecondOrderSystem
from .symmetry import VectorField3, pushforward
from .twistor import CurveFamily

# sampling boxes that keep each example away from its singular set
RECIPROCAL_BOX = {"p1": (-1.5, -0.5)}
BORIS_BOX = {"Z": (2.5, 3.5)}
SYM4_BOX = {"p0": (1.1, 2.0)}
GH_BOX = {"X": (0.5, 1.5), "p0": (1.0, 2.0), "p1": (-0.5, 0.2)}
DSYM_BOX = {"Y": (0.3, 0.8), "p0": (-1.0, 1.0), "p1": (-1.0, 1.0)}
SUBMAX_FIBER = {"v0": (0.8, 1.2), "v1": (0.5, 1.0), "v2": (3.0, 5.0)}
ROTATING_FIBER = {"v0": (0.5, 1.5), "v1": (-1.0, 1.0), "v2": (-1.0, 1.0)}

_DSYM_S = "sqrt(1 + p0^2 + Y^2*(p1^2 - p0^2 - 1))"

_SYSTEMS = {
    "trivial": ("0", "0", None),
    "submax": ("0", "-2*p0^3", None),
    "submax_swapped": ("p1^3", "0", None),
    "pt_cubic": ("0", "p0^3", None),
    "pt_quintic": ("0", "p0^5", None),
    "pt_poly": ("0", "p0^3 - 2*p0^4 + p0^6/3", None),
    "boris": ("0", "2*p1^2*p0/(Z*p0 - 1)", BORIS_BOX),
    "fourdexam": ("p0/X - sqrt((p0/X)^2 - 2*p1/X)", "(p0/X - sqrt((p0/X)^2 - 2*p1/X))^2/2", GH_BOX),
    "ode_reciprocal": ("2*Y/(p0*Z - Y*p1)^2", "2*Z/(p0*Z - Y*p1)^2", RECIPROCAL_BOX),
    "ode_sym_4": ("0", "-(p1 + sqrt(p0^2 - 1))^2", SYM4_BOX),
    # the two-symmetry Randers example in its literal form
    "dsym_literal": (
        f"2*Y*p1*{_DSYM_S}/(Y*(Y^2 - 1)) + Y*(1 + p0^2 + p1^2*Y^2*(p1^2 - p0^2 - 1))/(Y^2 - 1)^2",
        f"2*p0*(p1 + {_DSYM_S})/(Y*(Y^2 - 1))",
        DSYM_BOX,
    ),
    # unparametrised geodesics of the Randers metric with wind +∂Z
    "dsym": (
        f"Y*(1 + p0^2 + p1^2 + Y^2*(p1^2 - p0^2 - 1))/(Y^2 - 1)^2 - 2*Y*p1*{_DSYM_S}/(Y^2 - 1)^2",
        f"2*p0*(p1 - {_DSYM_S})/(Y*(Y^2 - 1))",
        DSYM_BOX,
    ),
    "control_linear": ("Y", "0", None),
    "control_quadratic": ("0", "Y*p1^2 + Z", None),
}

TORSION_FREE = ("submax", "pt_cubic", "pt_quintic", "pt_poly", "boris", "fourdexam", "ode_reciprocal", "ode_sym_4", "dsym_literal")
CONTROLS = ("control_linear", "control_quadratic")


def system_names() -> list:
    return sorted(_SYSTEMS) + ["submax_el"]


@cache
def system(name: str) -> SecondOrderSystem:
    if name == "submax_el":
        return euler_lagrange(submax_lagrangian())
    F, G, boxes = _SYSTEMS[name]
    return SecondOrderSystem.parse(F, G, boxes, name)


# ---------------------------------------------------------------------------
# heavenly potentials

THETAS = {"y4": "y^4/4", "reciprocal": "1/(x*w + y*z)", "x2y2": "x^2*y^2"}


@cache
def theta(name: str):
    return ec.parse(THETAS[name], THETA_CTX)


def random_heavenly_theta(rng: np.random.Generator):
    """A polynomial solution of the second heavenly equation.

    Either h(ax + by + cw + dz) with ac + bd = 0, or a function of (w, y)
    alone, or of (z, x) alone, each with (x, y)-degree at least 2.
    """
    kind = int(rng.integers(3))
    ints = lambda n: [int(v) for v in rng.integers(-3, 4, size=n)]  # noqa: E731
    if kind == 0:
        a, b = [v or 1 for v in ints(2)]
        t = int(rng.integers(1, 3)) * (1 if rng.random() < 0.5 else -1)
        c, d = t * b, -t * a  # ac + bd = 0
        deg = int(rng.integers(3, 6))
        coeffs = [Fraction(v, int(rng.integers(1, 4))) for v in ints(deg - 1)] + [Fraction(1)]
        ell = f"({a}*x + {b}*y + {c}*w + {d}*z)"
        terms = " + ".join(f"({c_})*{ell}^{k}" for k, c_ in zip(range(2, deg + 1), coeffs))
        return ec.parse(terms, THETA_CTX)
    u, v = ("w", "y") if kind == 1 else ("z", "x")
    terms = []
    for k in range(2, 5):
        for j in range(0, 3):
            c = int(rng.integers(-2, 3))
            if c:
                terms.append(f"({c})*{v}^{k}*{u}^{j}")
    if not terms:
        terms = [f"{v}^3"]
    return ec.parse(" + ".join(terms), THETA_CTX)


# ---------------------------------------------------------------------------
# metrics

_METRICS = {
    "boris": (
        ("w", "z", "x", "y"),
        {("w", "x"): "1", ("z", "y"): "1", ("w", "w"): "x^2", ("y", "y"): "z^2 + 2*z/y", ("w", "y"): "2*(z*x + x/y)"},
        None,
    ),
    "reciprocal": (
        ("w", "z", "x", "y"),
        {
            ("w", "x"): "1",
            ("z", "y"): "1",
            ("z", "z"): "-2*w^2/(x*w + y*z)^3",
            ("w", "w"): "-2*z^2/(x*w + y*z)^3",
            ("w", "z"): "4*w*z/(x*w + y*z)^3",
        },
        None,
    ),
    "ode_sym_4": (
        ("w", "z", "x", "y"),
        {
            ("x", "y"): "1",
            ("w", "z"): "1",
            ("w", "w"): "y/sqrt(y^2 - 1)",
            ("y", "z"): "x",
            ("w", "y"): "x*y/sqrt(y^2 - 1)",
        },
        {"y": (1.1, 2.0)},
    ),
    "flat": (("w", "z", "x", "y"), {("w", "x"): "1", ("z", "y"): "1"}, None),
}


@cache
def metric(name: str) -> Metric4:
    if name.startswith("heavenly_"):
        return heavenly_metric(theta(name[len("heavenly_"):]))
    if name == "gh_yt2":
        return gh_metric_fixture()
    coords, terms, boxes = _METRICS[name]
    ctx = ec.Context(coords, boxes)
    return Metric4.from_quadratic(coords, {k: ec.parse(v, ctx) for k, v in terms.items()}, boxes)


def metric_names() -> list:
    return sorted(_METRICS) + ["gh_yt2", "heavenly_reciprocal", "heavenly_y4"]


@cache
def gh_data() -> GHData:
    return GHData(ec.parse("y*t^2", ec.Context(GH_COORDS)))


@cache
def gh_metric_fixture() -> Metric4:
    from .curvature import gh_metric

    return gh_metric(gh_data())


# ---------------------------------------------------------------------------
# curve families

_CURVES = {
    "lines": ("w + X*y", "z - X*x", ("w", "z", "x", "y"), None, None),
    "boris": (
        "w + y*X",
        "1/y + 1/(y^2*(z - x*X))",
        ("w", "z", "x", "y"),
        ("Y - X*p0", "X*p1/(p0^2*(Z - 1/p0)^2) + 1/(p0^2*(Z - 1/p0))", "p1/(p0^2*(Z - 1/p0)^2)", "p0"),
        None,
    ),
    "ode_sym_4": ("w + X*y", "log(X - x) - sqrt(y^2 - 1)*X + z", ("w", "z", "x", "y"), None, {"y": (1.1, 2.0)}),
    "gh_yt2": ("w + X*y - X^2*t", "z - 2*X*y*t + X^2*t^2", ("w", "z", "t", "y"), ("Y - X*p0", "Z", "0", "p0"), None),
}


@cache
def curves(name: str) -> CurveFamily:
    Ys, Zs, params, seed, boxes = _CURVES[name]
    return CurveFamily.parse(Ys, Zs, params, seed, boxes)


def curve_names() -> list:
    return sorted(_CURVES)


# ---------------------------------------------------------------------------
# symmetry algebras, in their literal form

_ALGEBRAS = {
    "L6": [
        ("1", "0", "0"), ("0", "1", "0"), ("0", "0", "1"),
        ("0", "X", "0"), ("0", "Z", "0"), ("X", "2*Y", "Z"),
    ],
    "L9_extra": [("0", "3*Y", "Z"), ("0", "3*Z^2/2", "X"), ("X^2/2", "X*Y/2 + Z^3/4", "X*Z/2")],
    "L5": [("0", "1", "0"), ("0", "0", "1"), ("X", "Y", "0"), ("-X/2", "0", "Z"), ("0", "X^2", "2*Y")],
    "L4": [("1", "0", "0"), ("0", "1", "0"), ("0", "0", "1"), ("Y", "X", "0")],
    "L4a": [("0", "1", "0"), ("0", "-X", "0"), ("0", "0", "1"), ("1", "-X*Z", "0")],
    # the lower-case y in one generator is read as Y
    "L4b": [("2", "0", "0"), ("0", "0", "1"), ("-Y^2", "0", "-Y"), ("2*Z", "1", "0")],
}

# the literal algebras act on the system with the roles of Y and Z exchanged;
# this map carries (Y'' = (Z')^3, Z'' = 0) to Y'' = 0, Z'' = -2(Y')^3
SUBMAX_NEW_OF_OLD = {"X": "X", "Y": "Z", "Z": "-2*Y"}
SUBMAX_OLD_OF_NEW = {"X": "X", "Y": "-Z/2", "Z": "Y"}


@cache
def algebra(name: str) -> tuple:
    if name == "L9":
        return algebra("L6") + algebra("L9_extra")
    if name in ("L6_submax", "L9_submax"):
        base = algebra(name.split("_")[0])
        ctx = ec.Context(("X", "Y", "Z"))
        new = {k: ec.parse(v, ctx) for k, v in SUBMAX_NEW_OF_OLD.items()}
        old = {k: ec.parse(v, ctx) for k, v in SUBMAX_OLD_OF_NEW.items()}
        return tuple(pushforward(f, new, old) for f in base)
    if name.startswith("L7_"):
        k = int(name[3:])
        return algebra("L6") + (VectorField3.parse("0", f"{k}*Y", "Z"),)
    return tuple(VectorField3.parse(*c) for c in _ALGEBRAS[name])


def algebra_names() -> list:
    return sorted(set(_ALGEBRAS) - {"L9_extra"}) + ["L6_submax", "L7_4", "L9", "L9_submax"]


# ---------------------------------------------------------------------------
# β families

def beta(name: str) -> BetaFamily:
    if name == "submax":
        return BetaFamily.from_mapping({3: -2})
    if name.startswith("single_"):
        return BetaFamily.from_mapping({int(name[7:]): 1})
    if name == "geometric":
        # (Y')^3 / (1 − Y') known through (Y')^40
        return BetaFamily.from_mapping({k: 1 for k in range(3, 41)}, series=True, order=40)
    if name == "quadratic":
        return BetaFamily.from_mapping({0: 1, 1: -3, 2: Fraction(1, 2)})
    raise KeyError(name)


def random_beta(rng: np.random.Generator) -> BetaFamily:
    support = rng.choice(np.arange(0, 9), size=int(rng.integers(1, 4)), replace=False)
    xi = {int(k): Fraction(int(rng.integers(-3, 4)), int(rng.integers(1, 4))) for k in support}
    return BetaFamily.from_mapping(xi)


# ---------------------------------------------------------------------------
# Finsler data

@cache
def rotating_zermelo(boxes: tuple = (("Y", (0.3, 0.8)),)) -> ZermeloData:
    return ZermeloData.parse(["1", "0", "0", "1", "0", "Y^2"], ["0", "0", "1"], dict(boxes))


@cache
def submax_finsler() -> FinslerFunction:
    boxes = {"X": (0.5, 1.5), "Y": (0.5, 1.5)}
    boxes.update(SUBMAX_FIBER)
    return FinslerFunction.parse("sqrt(v1*(2*v2*v0^2 - 2*X*v1^3 + 6*Y*v1^2*v0))/v0", boxes)


@cache
def submax_lagrangian():
    return ec.parse("2*p0*p1 - 2*X*p0^4 + 6*Y*p0^3", ec.Context(COORDS))


__all__ = [n for n in dir() if not n.startswith("_") and n not in ("annotations", "cache", "np", "ec", "E")]
