"""Variable contexts, domain boxes and sample points."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .errors import DomainError, UndeclaredVariableError

DEFAULT_BOX = (0.5, 1.5)
_IDENT = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")


@dataclass(frozen=True)
class Context:
    """Ordered variable names with optional closed sampling intervals."""

    names: tuple
    boxes: tuple = field(default=())

    def __init__(self, names: Iterable[str], boxes: Mapping[str, tuple] | None = None):
        names = tuple(names)
        if len(set(names)) != len(names):
            raise ValueError("variable names must be unique")
        for n in names:
            if not _IDENT.match(n):
                raise ValueError(f"{n!r} is not an ASCII identifier")
        boxes = dict(boxes or {})
        for n, (lo, hi) in boxes.items():
            if n not in names:
                raise UndeclaredVariableError(n, names)
            if not lo <= hi:
                raise ValueError(f"empty interval for {n}")
        object.__setattr__(self, "names", names)
        object.__setattr__(
            self, "boxes", tuple((n, (float(boxes[n][0]), float(boxes[n][1]))) for n in names if n in boxes)
        )

    def __contains__(self, name):
        return name in self.names

    def index(self, name) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise UndeclaredVariableError(name, self.names) from None

    def box(self, name) -> tuple:
        for n, b in self.boxes:
            if n == name:
                return b
        if name not in self.names:
            raise UndeclaredVariableError(name, self.names)
        return DEFAULT_BOX

    def with_boxes(self, **boxes) -> "Context":
        merged = dict(self.boxes)
        merged.update(boxes)
        return Context(self.names, merged)

    def extend(self, names: Iterable[str], boxes: Mapping[str, tuple] | None = None) -> "Context":
        merged = dict(self.boxes)
        merged.update(boxes or {})
        return Context(self.names + tuple(n for n in names if n not in self.names), merged)

    def check(self, expr) -> None:
        for n in expr.free:
            if n not in self.names:
                raise UndeclaredVariableError(n, self.names)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        lo = np.array([self.box(v)[0] for v in self.names])
        hi = np.array([self.box(v)[1] for v in self.names])
        return lo + (hi - lo) * rng.random((n, len(self.names)))

    def point(self, values: Mapping[str, float] | None = None, **kw) -> "Point":
        vals = dict(values or {})
        vals.update(kw)
        return Point(self, vals)


class Point:
    """A full assignment of finite floats to the variables of a context."""

    __slots__ = ("ctx", "values")

    def __init__(self, ctx: Context, values: Mapping[str, float], check_box: bool = True):
        for n in values:
            if n not in ctx.names:
                raise UndeclaredVariableError(n, ctx.names)
        missing = [n for n in ctx.names if n not in values]
        if missing:
            raise DomainError(f"unassigned variables: {', '.join(missing)}")
        arr = np.array([float(values[n]) for n in ctx.names])
        if not np.all(np.isfinite(arr)):
            raise DomainError("point coordinates must be finite")
        if check_box:
            for n, (lo, hi) in ctx.boxes:
                v = float(values[n])
                if not lo <= v <= hi:
                    raise DomainError(f"{n}={v} outside [{lo}, {hi}]")
        self.ctx = ctx
        self.values = arr

    def __getitem__(self, name):
        return float(self.values[self.ctx.index(name)])

    def as_dict(self):
        return dict(zip(self.ctx.names, map(float, self.values)))

    def __repr__(self):
        inner = ", ".join(f"{n}={v:g}" for n, v in zip(self.ctx.names, self.values))
        return f"Point({inner})"
