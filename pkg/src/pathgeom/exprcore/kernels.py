"""Batch tape evaluation: a numba kernel and a pure-numpy fallback.

Set ``PATHGEOM_NUMBA=0`` in the environment to force the numpy path.
Both return ``(values, scales, bad)`` where ``bad[k]`` is the tape index of
the first singular instruction at point ``k`` or ``-1``.
"""

from __future__ import annotations

import math
import os

import numpy as np

from .tape import (
    OP_ADD, OP_CONST, OP_COS, OP_EXP, OP_LOG, OP_MUL, OP_POWF, OP_POWI, OP_SIN, OP_VAR,
)

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False


def numba_enabled() -> bool:
    return HAVE_NUMBA and os.environ.get("PATHGEOM_NUMBA", "1").strip().lower() not in ("0", "false", "no", "off")


def _run_scalar(op, start, count, args, fval, ip, iq, outputs, X):
    npts = X.shape[0]
    m = op.shape[0]
    nout = outputs.shape[0]
    vals = np.empty((npts, nout))
    scales = np.empty((npts, nout))
    bad = np.full(npts, -1, np.int64)
    reg = np.empty(m)
    sc = np.empty(m)
    for k in range(npts):
        for i in range(m):
            o = op[i]
            v = 0.0
            s = 0.0
            singular = False
            if o == OP_CONST:
                v = fval[i]
                s = abs(v)
            elif o == OP_VAR:
                v = X[k, ip[i]]
                s = abs(v)
            elif o == OP_ADD:
                for j in range(start[i], start[i] + count[i]):
                    a = args[j]
                    v += reg[a]
                    if sc[a] > s:
                        s = sc[a]
            elif o == OP_MUL:
                v = 1.0
                s = 1.0
                for j in range(start[i], start[i] + count[i]):
                    a = args[j]
                    v *= reg[a]
                    s *= sc[a]
            else:
                a = args[start[i]]
                b = reg[a]
                if o == OP_POWI:
                    n = ip[i]
                    if b == 0.0 and n < 0:
                        singular = True
                    else:
                        v = b ** n
                        s = sc[a] ** n if n > 0 else abs(v)
                elif o == OP_POWF:
                    p = ip[i]
                    q = iq[i]
                    if b < 0.0:
                        if q % 2 == 0:
                            singular = True
                        else:
                            v = (-b) ** fval[i]
                            if p % 2 != 0:
                                v = -v
                    elif b == 0.0:
                        if p < 0:
                            singular = True
                    else:
                        if p == 1 and q == 2:
                            v = math.sqrt(b)
                        else:
                            v = b ** fval[i]
                    if not singular:
                        s = sc[a] ** fval[i] if p > 0 else abs(v)
                elif o == OP_EXP:
                    v = math.exp(b) if b < 700.0 else math.inf
                    s = abs(v)
                elif o == OP_LOG:
                    if b <= 0.0:
                        singular = True
                    else:
                        v = math.log(b)
                        s = abs(v)
                elif o == OP_SIN:
                    v = math.sin(b)
                    s = abs(v)
                else:
                    v = math.cos(b)
                    s = abs(v)
            if singular or not math.isfinite(v):
                bad[k] = i
                break
            reg[i] = v
            sc[i] = s
        if bad[k] >= 0:
            for r in range(nout):
                vals[k, r] = math.nan
                scales[k, r] = math.nan
        else:
            for r in range(nout):
                vals[k, r] = reg[outputs[r]]
                scales[k, r] = sc[outputs[r]]
    return vals, scales, bad


if HAVE_NUMBA:
    _run_numba = njit(cache=True, nogil=True)(_run_scalar)
else:  # pragma: no cover
    _run_numba = None


def run_numpy(op, start, count, args, fval, ip, iq, outputs, X):
    npts = X.shape[0]
    m = op.shape[0]
    reg = np.empty((m, npts))
    sc = np.empty((m, npts))
    bad = np.full(npts, -1, np.int64)
    alive = np.ones(npts, bool)
    with np.errstate(all="ignore"):
        for i in range(m):
            o = op[i]
            sing = None
            if o == OP_CONST:
                v = np.full(npts, fval[i])
                s = np.abs(v)
            elif o == OP_VAR:
                v = X[:, ip[i]].astype(float)
                s = np.abs(v)
            elif o in (OP_ADD, OP_MUL):
                idx = args[start[i]:start[i] + count[i]]
                if o == OP_ADD:
                    v = reg[idx].sum(axis=0)
                    s = sc[idx].max(axis=0)
                else:
                    v = reg[idx].prod(axis=0)
                    s = sc[idx].prod(axis=0)
            else:
                a = args[start[i]]
                b = reg[a]
                if o == OP_POWI:
                    n = int(ip[i])
                    sing = (b == 0.0) if n < 0 else None
                    bb = np.where(b == 0.0, 1.0, b) if n < 0 else b
                    v = bb ** float(n)
                    s = sc[a] ** float(n) if n > 0 else np.abs(v)
                elif o == OP_POWF:
                    p, q, f = int(ip[i]), int(iq[i]), fval[i]
                    neg = b < 0.0
                    sing = neg if q % 2 == 0 else np.zeros(npts, bool)
                    if p < 0:
                        sing = sing | (b == 0.0)
                    mag = np.abs(b)
                    mag = np.where(sing, 1.0, mag)
                    v = np.sqrt(mag) if (p == 1 and q == 2) else mag ** f
                    if p % 2 != 0 and q % 2 != 0:
                        v = np.where(neg, -v, v)
                    s = sc[a] ** f if p > 0 else np.abs(v)
                elif o == OP_EXP:
                    v = np.exp(b)
                    s = np.abs(v)
                elif o == OP_LOG:
                    sing = b <= 0.0
                    v = np.log(np.where(sing, 1.0, b))
                    s = np.abs(v)
                elif o == OP_SIN:
                    v = np.sin(b)
                    s = np.abs(v)
                else:
                    v = np.cos(b)
                    s = np.abs(v)
            newly = ~np.isfinite(v)
            if sing is not None:
                newly = newly | sing
            newly &= alive
            if newly.any():
                bad[newly] = i
                alive &= ~newly
            reg[i] = v
            sc[i] = s
    vals = reg[outputs].T.copy()
    scales = sc[outputs].T.copy()
    vals[~alive] = np.nan
    scales[~alive] = np.nan
    return vals, scales, bad


def run_tape(tape, X, backend: str | None = None):
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if backend is None:
        backend = "numba" if numba_enabled() else "numpy"
    a = (tape.op, tape.start, tape.count, tape.args, tape.fval, tape.ip, tape.iq, tape.outputs, X)
    if backend == "numba":
        if _run_numba is None:
            raise RuntimeError("numba is not available")
        return _run_numba(*a)
    if backend == "numpy":
        return run_numpy(*a)
    if backend == "python":
        return _run_scalar(*a)
    raise ValueError(f"unknown backend {backend!r}")
