"""Real functions on an interval, with optional derivatives and complex extension."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, EvaluationError
from .hermitian import Interval, REAL_LINE

_EPS = np.finfo(float).eps
_H1 = _EPS ** (1 / 3)
_H2 = _EPS ** (1 / 4)


def _scalar_out(t_in, out):
    return float(out) if np.ndim(t_in) == 0 else out


@dataclass(frozen=True)
class ScalarFunction:
    """A vectorised real function ``f: domain -> R``.

    ``func``, ``d1`` and ``d2`` take and return numpy arrays.  Missing
    derivatives fall back to central differences; ``cfunc`` is the analytic
    continuation used off the real axis.
    """

    func: Callable = field(repr=False)
    domain: Interval = REAL_LINE
    d1: Optional[Callable] = field(default=None, repr=False)
    d2: Optional[Callable] = field(default=None, repr=False)
    cfunc: Optional[Callable] = field(default=None, repr=False)
    name: str = "f"

    def __call__(self, t):
        ta = np.asarray(t, dtype=float)
        out = np.asarray(self.func(ta), dtype=float)
        if out.shape != ta.shape:
            out = np.broadcast_to(out, ta.shape).copy()
        return _scalar_out(t, out)

    # -- derivatives -----------------------------------------------------

    def _step(self, t: np.ndarray, base: float) -> np.ndarray:
        h = base * np.maximum(1.0, np.abs(t))
        # keep the stencil inside the domain
        room = np.minimum(t - self.domain.lower, self.domain.upper - t)
        return np.minimum(h, 0.25 * room)

    def deriv(self, t):
        """First derivative (analytic if available, else a central difference)."""
        ta = np.asarray(t, dtype=float)
        if self.d1 is not None:
            out = np.asarray(self.d1(ta), dtype=float)
            out = np.broadcast_to(out, ta.shape).copy() if out.shape != ta.shape else out
        else:
            h = self._step(ta, _H1)
            out = (np.asarray(self(ta + h)) - np.asarray(self(ta - h))) / (2 * h)
        return _scalar_out(t, out)

    def deriv2(self, t):
        """Second derivative (analytic if available, else a central second difference)."""
        ta = np.asarray(t, dtype=float)
        if self.d2 is not None:
            out = np.asarray(self.d2(ta), dtype=float)
            out = np.broadcast_to(out, ta.shape).copy() if out.shape != ta.shape else out
        elif self.d1 is not None:
            h = self._step(ta, _H1)
            out = (np.asarray(self.deriv(ta + h)) - np.asarray(self.deriv(ta - h))) / (2 * h)
        else:
            h = self._step(ta, _H2)
            f0 = np.asarray(self(ta))
            out = (np.asarray(self(ta + h)) - 2 * f0 + np.asarray(self(ta - h))) / (h * h)
        return _scalar_out(t, out)

    @property
    def has_complex(self) -> bool:
        return self.cfunc is not None

    def complex(self, z):
        if self.cfunc is None:
            raise EvaluationError(f"{self.name} has no complex evaluator")
        za = np.asarray(z, dtype=complex)
        out = np.asarray(self.cfunc(za), dtype=complex)
        if out.shape != za.shape:
            out = np.broadcast_to(out, za.shape).copy()
        return complex(out) if np.ndim(z) == 0 else out

    # -- algebra ---------------------------------------------------------

    def restrict(self, interval: Interval) -> "ScalarFunction":
        if not self.domain.contains_interval(interval):
            raise DomainError(f"{interval} is not inside the domain {self.domain} of {self.name}")
        return replace(self, domain=interval)

    def renamed(self, name: str) -> "ScalarFunction":
        return replace(self, name=name)

    def __mul__(self, c):
        if not isinstance(c, (int, float, np.floating, np.integer)):
            return NotImplemented
        c = float(c)
        return ScalarFunction(
            lambda t: c * self.func(t),
            self.domain,
            None if self.d1 is None else (lambda t: c * self.d1(t)),
            None if self.d2 is None else (lambda t: c * self.d2(t)),
            None if self.cfunc is None else (lambda z: c * self.cfunc(z)),
            f"{c:g}*{self.name}",
        )

    __rmul__ = __mul__

    def __neg__(self):
        return (-1.0) * self

    def __add__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            c = float(other)
            return ScalarFunction(
                lambda t: self.func(t) + c, self.domain, self.d1, self.d2,
                None if self.cfunc is None else (lambda z: self.cfunc(z) + c),
                f"{self.name}+{c:g}",
            )
        if not isinstance(other, ScalarFunction):
            return NotImplemented
        a, b = self, other

        def both(x, y):
            return None if x is None or y is None else (lambda t: x(t) + y(t))

        return ScalarFunction(
            lambda t: a.func(t) + b.func(t),
            a.domain.intersect(b.domain),
            both(a.d1, b.d1),
            both(a.d2, b.d2),
            both(a.cfunc, b.cfunc),
            f"({a.name}+{b.name})",
        )

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-1.0) * other


def check_consistency(f: ScalarFunction, points) -> float:
    """Validate ``f`` on sample points; return the worst relative derivative mismatch.

    Raises :class:`EvaluationError` if ``f`` is not finite there.  When ``f``
    carries an analytic derivative it is compared with a central difference
    at step ``1e-5 * max(1, |t|)``.
    """
    t = np.asarray(points, dtype=float)
    if np.any(~f.domain.contains(t)):
        raise DomainError(f"sample points outside {f.domain}")
    v = np.asarray(f(t))
    if not np.all(np.isfinite(v)):
        raise EvaluationError(f"{f.name} is not finite on the sample points")
    if f.d1 is None:
        return 0.0
    h = np.minimum(1e-5 * np.maximum(1.0, np.abs(t)), 0.25 * np.minimum(t - f.domain.lower, f.domain.upper - t))
    fd = (np.asarray(f(t + h)) - np.asarray(f(t - h))) / (2 * h)
    an = np.asarray(f.deriv(t))
    return float(np.max(np.abs(fd - an) / np.maximum(np.abs(an), 1e-12)))


def constant(c: float, domain: Interval = REAL_LINE) -> ScalarFunction:
    c = float(c)
    return ScalarFunction(
        lambda t: np.full(np.shape(t), c),
        domain,
        lambda t: np.zeros(np.shape(t)),
        lambda t: np.zeros(np.shape(t)),
        lambda z: np.full(np.shape(z), c, dtype=complex),
        name=f"const({c:g})",
    )


def finite_or_raise(values, what: str = "function"):
    v = np.asarray(values)
    if not np.all(np.isfinite(v)):
        raise EvaluationError(f"{what} produced non-finite values")
    return values


def is_number(x) -> bool:
    return isinstance(x, (int, float, np.floating, np.integer)) and not isinstance(x, bool) and math.isfinite(float(x))
