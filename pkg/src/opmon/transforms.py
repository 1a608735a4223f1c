"""Transform algebra on positive operator monotone functions of the half-line.

``sharp`` and ``star`` are the two involutions, ``t_transform`` the
normalising map T with ``f(t) = f(1) + f'(1) (t-1)/t (Tf)(t)``, and
``lambda_map`` the linear map with the extreme functions as eigenvectors.
Compositions are lazy: every transform returns a new function object
wrapping its argument.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .catalog import compose, extreme, mobius
from .divided import _dd2
from .errors import ConstantFunctionError, DomainError, EvaluationError
from .functions import ScalarFunction
from .hermitian import HALF_LINE, UNIT_INTERVAL, Interval

#: below this distance from 1 the ratio in T and Lambda is replaced by its Taylor expansion
REMOVABLE_GAP = 1e-6
_STEP1 = 1e-4
_STEP2 = 1e-3


def derivative_at_one(f: ScalarFunction) -> float:
    """``f'(1)``: analytic if available, otherwise a five-point stencil at step 1e-4."""
    if f.d1 is not None:
        return float(f.deriv(1.0))
    h = _STEP1
    return float((-f(1 + 2 * h) + 8 * f(1 + h) - 8 * f(1 - h) + f(1 - 2 * h)) / (12 * h))


def second_derivative_at_one(f: ScalarFunction) -> float:
    if f.d2 is not None:
        return float(f.deriv2(1.0))
    if f.d1 is not None:
        h = _STEP1
        d = f.deriv
        return float((-d(1 + 2 * h) + 8 * d(1 + h) - 8 * d(1 - h) + d(1 - 2 * h)) / (12 * h))
    h = _STEP2
    return float(
        (-f(1 + 2 * h) + 16 * f(1 + h) - 30 * f(1.0) + 16 * f(1 - h) - f(1 - 2 * h)) / (12 * h * h)
    )


@dataclass(frozen=True)
class NormalizedFunction:
    """A function on (0, inf) with ``f(1)`` and ``f'(1)`` cached."""

    fn: ScalarFunction
    value_at_1: float
    derivative_at_1: float
    positive: bool

    @classmethod
    def of(cls, f: ScalarFunction, sample_ts=None) -> "NormalizedFunction":
        if not f.domain.contains_interval(HALF_LINE):
            raise DomainError(f"{f.name} is not defined on the whole half-line")
        ts = default_samples() if sample_ts is None else np.asarray(sample_ts, dtype=float)
        return cls(f, float(f(1.0)), derivative_at_one(f), bool(np.all(np.asarray(f(ts)) > 0)))

    def in_p0(self) -> bool:
        return self.positive and abs(self.value_at_1 - 1.0) < 1e-12

    def bound_violation(self, sample_ts=None) -> float:
        """``max(f(t) - (t + 1))`` on the samples; members of P0 give a non-positive value."""
        ts = np.geomspace(1e-3, 100, 400) if sample_ts is None else np.asarray(sample_ts, dtype=float)
        return float(np.max(np.asarray(self.fn(ts)) - (ts + 1)))

    def __call__(self, t):
        return self.fn(t)


def default_samples():
    return np.geomspace(1e-3, 1e3, 61)


def _require_half_line(f: ScalarFunction, what: str):
    if not f.domain.contains_interval(HALF_LINE):
        raise DomainError(f"{what} needs a function on (0, inf); {f.name} lives on {f.domain}")


def sharp(f: ScalarFunction) -> ScalarFunction:
    """``f#(t) = t / f(t)``."""
    _require_half_line(f, "sharp")

    def func(t):
        v = np.asarray(f(t))
        if np.any(v == 0):
            raise EvaluationError(f"{f.name} vanishes; sharp is undefined")
        return t / v

    def d1(t):
        v, dv = np.asarray(f(t)), np.asarray(f.deriv(t))
        return (v - t * dv) / (v * v)

    def d2(t):
        v, dv, ddv = np.asarray(f(t)), np.asarray(f.deriv(t)), np.asarray(f.deriv2(t))
        return (-2 * dv - t * ddv) / (v * v) + 2 * t * dv * dv / v**3

    cf = None if f.cfunc is None else (lambda z: z / f.cfunc(z))
    return ScalarFunction(func, HALF_LINE, d1, d2, cf, name=f"sharp({f.name})")


def star(f: ScalarFunction) -> ScalarFunction:
    """``f*(t) = t f(1/t)``."""
    _require_half_line(f, "star")

    def d1(t):
        u = 1 / t
        return np.asarray(f(u)) - np.asarray(f.deriv(u)) * u

    def d2(t):
        u = 1 / t
        return np.asarray(f.deriv2(u)) * u**3

    cf = None if f.cfunc is None else (lambda z: z * f.cfunc(1 / z))
    return ScalarFunction(lambda t: t * np.asarray(f(1 / t)), HALF_LINE, d1, d2, cf, name=f"star({f.name})")


def _ratio_at_one(f: ScalarFunction, f1: float, fp1: float, fpp1: float):
    """``t -> (f(t) - f(1)) / (t - 1)`` with the removable singularity at 1 filled in."""

    def ratio(t):
        t = np.asarray(t, dtype=float)
        out = np.empty(t.shape)
        near = np.abs(t - 1) <= REMOVABLE_GAP
        far = ~near
        if np.any(far):
            out[far] = (np.asarray(f(t[far])) - f1) / (t[far] - 1)
        if np.any(near):
            out[near] = fp1 + 0.5 * fpp1 * (t[near] - 1)
        return out

    return ratio


def _complex_ratio(f: ScalarFunction, f1: float, fp1: float):
    def ratio(z):
        z = np.asarray(z, dtype=complex)
        with np.errstate(invalid="ignore", divide="ignore"):
            out = (np.asarray(f.cfunc(z)) - f1) / (z - 1)
        return np.where(z == 1, fp1, out)

    return ratio


def lambda_map(f: ScalarFunction) -> ScalarFunction:
    """``Lambda(f)(t) = t (f(t) - f(1)) / (t - 1)``, ``Lambda(f)(1) = f'(1)``; linear in ``f``."""
    if not f.domain.contains(1.0):
        raise DomainError(f"Lambda needs 1 inside the domain of {f.name}")
    f1 = float(f(1.0))
    fp1 = derivative_at_one(f)
    if not np.isfinite(fp1):
        raise EvaluationError(f"{f.name} has no derivative at 1")
    fpp1 = second_derivative_at_one(f)
    ratio = _ratio_at_one(f, f1, fp1, fpp1)

    def d1(t):
        t = np.asarray(t, dtype=float)
        return ratio(t) + t * _dd2(f, t, t, 1.0)

    cf = None
    if f.cfunc is not None:
        cr = _complex_ratio(f, f1, fp1)
        cf = lambda z: np.asarray(z, dtype=complex) * cr(z)  # noqa: E731
    return ScalarFunction(lambda t: t * ratio(t), f.domain, d1, None, cf, name=f"Lambda({f.name})")


def poly_lambda(coeffs, f: ScalarFunction) -> ScalarFunction:
    """``p(Lambda)(f)`` for ``p(x) = sum coeffs[k] x**k`` by Horner's scheme."""
    c = [float(x) for x in coeffs]
    if not c:
        raise ValueError("need at least one coefficient")
    g = c[-1] * f
    for ck in reversed(c[:-1]):
        g = lambda_map(g) + ck * f
    return g.renamed(f"p(Lambda)({f.name})")


def t_transform(f: ScalarFunction) -> ScalarFunction:
    """``(Tf)(t) = (t / f'(1)) (f(t) - f(1)) / (t - 1)``; ``(Tf)(1) = 1``."""
    if not f.domain.contains(1.0):
        raise DomainError(f"T needs 1 inside the domain of {f.name}")
    f1 = float(f(1.0))
    fp1 = derivative_at_one(f)
    if not abs(fp1) >= 1e-12:
        raise ConstantFunctionError(f"f'(1) = {fp1:g}: {f.name} is constant, T is undefined")
    fpp1 = second_derivative_at_one(f)
    ratio = _ratio_at_one(f, f1, fp1, fpp1)

    def d1(t):
        t = np.asarray(t, dtype=float)
        return (ratio(t) + t * _dd2(f, t, t, 1.0)) / fp1

    cf = None
    if f.cfunc is not None:
        cr = _complex_ratio(f, f1, fp1)
        cf = lambda z: np.asarray(z, dtype=complex) * cr(z) / fp1  # noqa: E731
    return ScalarFunction(lambda t: t * ratio(t) / fp1, f.domain, d1, None, cf, name=f"T({f.name})")


def reconstruct_from_t(f1: float, fp1: float, tf: ScalarFunction) -> ScalarFunction:
    """Invert T: ``t -> f1 + fp1 (t - 1)/t (Tf)(t)``."""
    return ScalarFunction(
        lambda t: f1 + fp1 * (t - 1) / t * np.asarray(tf(t)),
        tf.domain,
        name=f"untransform({tf.name})",
    )


def extreme_function(lam: float) -> ScalarFunction:
    """``e_lambda(t) = t / (lambda + (1 - lambda) t)``, the extreme points of P0."""
    return extreme(lam)


def decomposition_check(f: ScalarFunction, sample_ts) -> float:
    """Max residual of ``lambda Tf + (1 - lambda) (T f*)* = f`` with ``lambda = f'(1)``."""
    ts = np.asarray(sample_ts, dtype=float)
    lam = derivative_at_one(f)
    if not 0.0 < lam < 1.0:
        raise ValueError(f"needs 0 < f'(1) < 1, got {lam:g} (constant or identity?)")
    lhs = lam * np.asarray(t_transform(f)(ts)) + (1 - lam) * np.asarray(star(t_transform(star(f)))(ts))
    return float(np.max(np.abs(lhs - np.asarray(f(ts)))))


def derivative_sum_check(f: ScalarFunction) -> float:
    """``f'(1) + (f*)'(1)``, equal to 1 for members of P0."""
    return derivative_at_one(f) + derivative_at_one(star(f))


def mobius_transport(f: ScalarFunction, direction: str) -> ScalarFunction:
    """Move ``f`` between (0, 1) and (0, inf) through ``h(t) = t/(t+1)``.

    ``to-halfline`` takes ``f`` on (0, 1) to ``f o h`` on (0, inf);
    ``to-unit-interval`` takes ``f`` on (0, inf) to ``f o h^-1`` on (0, 1).
    """
    if direction in ("to-halfline", "to_halfline", "halfline"):
        if not f.domain.contains_interval(UNIT_INTERVAL):
            raise DomainError(f"to-halfline needs f on (0, 1); {f.name} lives on {f.domain}")
        return compose(mobius("to-unit"), f).renamed(f"{f.name}∘h")
    if direction in ("to-unit-interval", "to-unit", "to_unit", "unit"):
        _require_half_line(f, "to-unit-interval")
        return compose(mobius("to-halfline"), f).renamed(f"{f.name}∘h^-1")
    raise ValueError(f"unknown direction {direction!r}")


_NAMED = {
    "sharp": sharp,
    "star": star,
    "T": t_transform,
    "t": t_transform,
    "lambda": lambda_map,
    "Lambda": lambda_map,
    "mobius-to-unit": lambda f: mobius_transport(f, "to-unit-interval"),
    "mobius-to-halfline": lambda f: mobius_transport(f, "to-halfline"),
}


def apply_named(op: str, f: ScalarFunction) -> ScalarFunction:
    try:
        return _NAMED[op](f)
    except KeyError:
        raise ValueError(f"unknown transform {op!r}; known: {', '.join(sorted(set(_NAMED)))}") from None


def restrict_to_half_line(f: ScalarFunction) -> ScalarFunction:
    return f.restrict(Interval(0.0, np.inf))
