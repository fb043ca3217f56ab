"""Numeric evaluation and probabilistic zero testing."""

from __future__ import annotations

from collections import OrderedDict
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from . import expr as E
from .calculus import subs
from .context import Context, Point
from .errors import InconclusiveError, SingularEvaluationError, UndeclaredVariableError
from .kernels import run_tape
from .tape import compile_tape

DEFAULT_TRIALS = 20
DEFAULT_TOL = 1e-9
DEFAULT_SEED = 314159
_MAX_ROUNDS = 12

_cache: OrderedDict = OrderedDict()
_CACHE_SIZE = 512


def compiled(exprs: Sequence[E.Expr], names: Sequence[str]):
    """Tape for ``exprs`` over variables ``names``, memoized."""
    exprs = tuple(exprs)
    names = tuple(names)
    key = (tuple(id(e) for e in exprs), names)
    hit = _cache.get(key)
    if hit is not None and all(a is b for a, b in zip(hit[0], exprs)):
        _cache.move_to_end(key)
        return hit[1]
    for e in exprs:
        for n in e.free:
            if n not in names:
                raise UndeclaredVariableError(n, names)
    tape = compile_tape(list(exprs), names)
    _cache[key] = (exprs, tape)
    if len(_cache) > _CACHE_SIZE:
        _cache.popitem(last=False)
    return tape


def evaluate_batch(exprs, ctx_or_names, X, backend=None):
    """Evaluate many expressions at many points.

    Returns ``(values, scales, bad)`` with shapes (npts, nexpr), (npts, nexpr)
    and (npts,); ``bad[k] >= 0`` marks a singular point.
    """
    names = ctx_or_names.names if isinstance(ctx_or_names, Context) else tuple(ctx_or_names)
    tape = compiled(exprs, names)
    return run_tape(tape, X, backend)


def _offender(exprs, names, bad_index):
    tape = compiled(exprs, names)
    return tape.nodes[int(bad_index)]


def eval(e: E.Expr, pt: Point | Mapping[str, float], backend=None) -> float:  # noqa: A001
    """Evaluate ``e`` at a point, raising on any singular subterm."""
    if isinstance(pt, Point):
        names, values = pt.ctx.names, pt.values
    else:
        names = tuple(pt)
        values = np.array([float(pt[n]) for n in names])
    vals, _, bad = evaluate_batch([e], names, values[None, :], backend)
    if bad[0] >= 0:
        raise SingularEvaluationError(_offender([e], names, bad[0]), dict(zip(names, map(float, values))))
    return float(vals[0, 0])


def eval_many(exprs, pt: Point | Mapping[str, float], backend=None) -> np.ndarray:
    exprs = list(exprs)
    if isinstance(pt, Point):
        names, values = pt.ctx.names, pt.values
    else:
        names = tuple(pt)
        values = np.array([float(pt[n]) for n in names])
    vals, _, bad = evaluate_batch(exprs, names, values[None, :], backend)
    if bad[0] >= 0:
        raise SingularEvaluationError(_offender(exprs, names, bad[0]), dict(zip(names, map(float, values))))
    return vals[0]


def eval_exact(e: E.Expr, values: Mapping[str, Fraction]) -> Fraction:
    """Exact value at a rational point; fails if the result is irrational."""
    r = subs(e, {k: E.num(Fraction(v)) for k, v in values.items()})
    if r.op != E.NUM:
        raise ValueError(f"value is not rational: {r}")
    return r.val


def rng_for(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(DEFAULT_SEED if seed is None else seed)


def sample_good_points(exprs, ctx: Context, trials: int, seed=None, backend=None):
    """Draw ``trials`` points where every expression evaluates finitely.

    Returns ``(X, values, scales)``.  Raises InconclusiveError when repeated
    redraws keep hitting singularities.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    rng = rng_for(seed)
    exprs = list(exprs)
    tape = compiled(exprs, ctx.names)
    kept_X, kept_v, kept_s = [], [], []
    have = 0
    drawn = 0
    for _ in range(_MAX_ROUNDS):
        need = trials - have
        X = ctx.sample(rng, max(need, 4) if have else need)
        drawn += len(X)
        vals, scales, bad = run_tape(tape, X, backend)
        ok = bad < 0
        idx = np.flatnonzero(ok)[:need]
        kept_X.append(X[idx])
        kept_v.append(vals[idx])
        kept_s.append(scales[idx])
        have += len(idx)
        if have >= trials:
            return np.concatenate(kept_X), np.concatenate(kept_v), np.concatenate(kept_s)
        if drawn > 10 * trials + 40:
            break
    raise InconclusiveError(f"only {have} of {trials} sample points avoided singularities after {drawn} draws")


def residual_ratios(exprs, ctx: Context, trials=DEFAULT_TRIALS, seed=None, backend=None) -> np.ndarray:
    """Per expression, the worst |value| / (1 + scale) over the sampled points."""
    exprs = list(exprs)
    if not exprs:
        return np.zeros(0)
    _, vals, scales = sample_good_points(exprs, ctx, trials, seed, backend)
    return np.max(np.abs(vals) / (1.0 + np.abs(scales)), axis=0)


def zero_test_many(exprs, ctx: Context, trials=DEFAULT_TRIALS, tol=DEFAULT_TOL, seed=None, backend=None) -> list:
    exprs = list(exprs)
    pending = [i for i, e in enumerate(exprs) if not e.is_zero]
    out = [True] * len(exprs)
    if not pending:
        return out
    ratios = residual_ratios([exprs[i] for i in pending], ctx, trials, seed, backend)
    for i, r in zip(pending, ratios):
        out[i] = bool(r <= tol)
    return out


def zero_test(e: E.Expr, ctx: Context, trials=DEFAULT_TRIALS, tol=DEFAULT_TOL, seed=None, backend=None) -> bool:
    """Probabilistic test that ``e`` vanishes identically on the domain box."""
    return zero_test_many([e], ctx, trials, tol, seed, backend)[0]


def all_zero(exprs, ctx: Context, trials=DEFAULT_TRIALS, tol=DEFAULT_TOL, seed=None, backend=None) -> bool:
    return all(zero_test_many(exprs, ctx, trials, tol, seed, backend))


def fd_mismatch(e: E.Expr, v: str, ctx: Context, points: int = 5, seed=None, backend=None) -> float:
    """Worst relative gap between ∂e/∂v and a 5-point central difference."""
    from .calculus import diff

    de = diff(e, v)
    X, vals, _ = sample_good_points([e, de], ctx, points, seed, backend)
    j = ctx.index(v)
    tape = compiled([e], ctx.names)
    worst = 0.0
    for x, (_, d) in zip(X, vals):
        h = 1e-3 * (1.0 + abs(x[j]))
        stencil = np.repeat(x[None, :], 4, axis=0)
        stencil[:, j] += np.array([-2 * h, -h, h, 2 * h])
        f, _, bad = run_tape(tape, stencil, backend)
        if np.any(bad >= 0):
            continue
        f = f[:, 0]
        fd = (f[0] - 8 * f[1] + 8 * f[2] - f[3]) / (12 * h)
        worst = max(worst, abs(fd - d) / max(1.0, abs(d), abs(fd)))
    return worst
