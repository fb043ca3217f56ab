"""Symbolic expression engine: parsing, calculus, evaluation and zero testing."""

from .calculus import diff, diff_many, is_polynomial_in, jacobian, subs
from .context import DEFAULT_BOX, Context, Point
from .errors import (
    DomainError,
    ExprSyntaxError,
    InconclusiveError,
    NotIntegrableError,
    NotPolynomialError,
    PathGeomError,
    SingularEvaluationError,
    UndeclaredVariableError,
)
from .evaluate import (
    DEFAULT_SEED,
    DEFAULT_TOL,
    DEFAULT_TRIALS,
    all_zero,
    eval,
    eval_exact,
    eval_many,
    evaluate_batch,
    fd_mismatch,
    residual_ratios,
    sample_good_points,
    zero_test,
    zero_test_many,
)
from .expr import (
    ONE,
    ZERO,
    Expr,
    add,
    cos,
    dag_size,
    div,
    exp,
    func,
    log,
    mul,
    neg,
    normalize,
    num,
    pow_,
    sin,
    sqrt,
    sub,
    symbols,
    var,
)
from .kernels import numba_enabled
from .parse import parse, parse_unchecked
from .poly import Poly, expand, from_expr
from .printer import to_text
from .ratfunc import canonical, exact_equal, exact_is_zero, simplify, to_ratfunc

differentiate = diff
substitute = subs

__all__ = [n for n in dir() if not n.startswith("_")]
