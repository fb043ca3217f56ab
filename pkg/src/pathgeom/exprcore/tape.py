"""Compile expression DAGs into flat instruction tapes for batch evaluation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .expr import ADD, FUN, MUL, NUM, POW, VAR, Expr, postorder

OP_CONST, OP_VAR, OP_ADD, OP_MUL, OP_POWI, OP_POWF, OP_EXP, OP_LOG, OP_SIN, OP_COS = range(10)
_FUN_OPS = {"exp": OP_EXP, "log": OP_LOG, "sin": OP_SIN, "cos": OP_COS}


@dataclass
class Tape:
    nodes: list
    op: np.ndarray
    start: np.ndarray
    count: np.ndarray
    args: np.ndarray
    fval: np.ndarray
    ip: np.ndarray
    iq: np.ndarray
    outputs: np.ndarray

    def __len__(self):
        return len(self.nodes)


def compile_tape(exprs, names) -> Tape:
    col = {n: i for i, n in enumerate(names)}
    nodes = postorder(exprs)
    index = {id(n): i for i, n in enumerate(nodes)}
    m = len(nodes)
    op = np.zeros(m, np.int64)
    start = np.zeros(m, np.int64)
    count = np.zeros(m, np.int64)
    fval = np.zeros(m, np.float64)
    ip = np.zeros(m, np.int64)
    iq = np.ones(m, np.int64)
    args = []
    for i, n in enumerate(nodes):
        k = n.op
        start[i] = len(args)
        if k == NUM:
            op[i] = OP_CONST
            fval[i] = float(n.val)
        elif k == VAR:
            op[i] = OP_VAR
            ip[i] = col[n.val]
        elif k in (ADD, MUL):
            op[i] = OP_ADD if k == ADD else OP_MUL
            args.extend(index[id(a)] for a in n.args)
        elif k == POW:
            q = n.val
            op[i] = OP_POWI if q.denominator == 1 else OP_POWF
            ip[i] = q.numerator
            iq[i] = q.denominator
            fval[i] = float(q)
            args.append(index[id(n.args[0])])
        elif k == FUN:
            op[i] = _FUN_OPS[n.val]
            args.append(index[id(n.args[0])])
        count[i] = len(args) - start[i]
    outs = np.array([index[id(e)] for e in exprs], np.int64)
    return Tape(nodes, op, start, count, np.array(args, np.int64), fval, ip, iq, outs)
