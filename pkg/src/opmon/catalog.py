"""Built-in functions and the JSON function-spec language.

A spec is a name (``"sqrt"``), a dict ``{"fn": "power", "p": 0.5}``, a
composition ``{"compose": [spec, ...]}`` applied left to right, an affine
map ``{"affine": {"a": 2, "b": 1}}`` or a transform of another spec
``{"transform": "sharp", "of": spec}``.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError
from .functions import ScalarFunction, constant
from .hermitian import HALF_LINE, REAL_LINE, Interval, UNIT_INTERVAL

CATALOG = {
    "const": "constant c (param c, default 1)",
    "id": "identity t",
    "affine": "a*t + b (params a, b)",
    "power": "t**p on (0, inf) (param p)",
    "sqrt": "t**0.5 on (0, inf)",
    "log": "log t on (0, inf)",
    "log1p": "log(1 + t) on (-1, inf)",
    "square": "t**2",
    "cube": "t**3",
    "exp": "exp t",
    "extreme": "t / (lambda + (1 - lambda) t) on (0, inf) (param lambda in [0, 1])",
    "mobius": "t/(t+1) on (0, inf) (direction=to-unit) or t/(1-t) on (0, 1) (direction=to-halfline)",
    "poly": "polynomial with ascending coefficients (param coeffs)",
    "compose": "composition of specs, applied left to right (param fns)",
}


def identity(domain: Interval = REAL_LINE) -> ScalarFunction:
    return ScalarFunction(
        lambda t: np.array(t, dtype=float, copy=True),
        domain,
        lambda t: np.ones(np.shape(t)),
        lambda t: np.zeros(np.shape(t)),
        lambda z: np.array(z, dtype=complex, copy=True),
        name="id",
    )


def affine(a: float, b: float, domain: Interval = REAL_LINE) -> ScalarFunction:
    a, b = float(a), float(b)
    return ScalarFunction(
        lambda t: a * t + b,
        domain,
        lambda t: np.full(np.shape(t), a),
        lambda t: np.zeros(np.shape(t)),
        lambda z: a * z + b,
        name=f"affine({a:g},{b:g})",
    )


def power(p: float) -> ScalarFunction:
    p = float(p)
    return ScalarFunction(
        lambda t: np.power(t, p),
        HALF_LINE,
        lambda t: p * np.power(t, p - 1),
        lambda t: p * (p - 1) * np.power(t, p - 2),
        lambda z: np.power(z, p),
        name=f"power({p:g})",
    )


def log() -> ScalarFunction:
    return ScalarFunction(np.log, HALF_LINE, lambda t: 1 / t, lambda t: -1 / (t * t), np.log, name="log")


def log1p() -> ScalarFunction:
    return ScalarFunction(
        np.log1p,
        Interval(-1.0, math.inf),
        lambda t: 1 / (1 + t),
        lambda t: -1 / ((1 + t) ** 2),
        np.log1p,
        name="log1p",
    )


def poly(coeffs) -> ScalarFunction:
    c = np.polynomial.Polynomial(np.asarray(coeffs, dtype=float))
    dc, ddc = c.deriv(1), c.deriv(2)
    return ScalarFunction(c, REAL_LINE, dc, ddc, c, name=f"poly({list(map(float, coeffs))})")


def exp() -> ScalarFunction:
    return ScalarFunction(np.exp, REAL_LINE, np.exp, np.exp, np.exp, name="exp")


def extreme(lam: float) -> ScalarFunction:
    """``e_lambda(t) = t / (lambda + (1 - lambda) t)``; e_0 = 1, e_1 = identity."""
    lam = float(lam)
    if not 0.0 <= lam <= 1.0:
        raise DomainError(f"lambda must lie in [0, 1], got {lam}")
    mu = 1.0 - lam
    if lam == 0.0:
        return constant(1.0, HALF_LINE).renamed("extreme(0)")
    return ScalarFunction(
        lambda t: t / (lam + mu * t),
        HALF_LINE,
        lambda t: lam / (lam + mu * t) ** 2,
        lambda t: -2 * lam * mu / (lam + mu * t) ** 3,
        lambda z: z / (lam + mu * z),
        name=f"extreme({lam:g})",
    )


def mobius(direction: str = "to-unit") -> ScalarFunction:
    """``h(t) = t/(t+1)`` from (0, inf) onto (0, 1), or its inverse ``t/(1-t)``."""
    if direction in ("to-unit", "to_unit", "unit"):
        return ScalarFunction(
            lambda t: t / (t + 1),
            HALF_LINE,
            lambda t: 1 / (t + 1) ** 2,
            lambda t: -2 / (t + 1) ** 3,
            lambda z: z / (z + 1),
            name="mobius(to-unit)",
        )
    if direction in ("to-halfline", "to_halfline", "halfline"):
        return ScalarFunction(
            lambda t: t / (1 - t),
            UNIT_INTERVAL,
            lambda t: 1 / (1 - t) ** 2,
            lambda t: 2 / (1 - t) ** 3,
            lambda z: z / (1 - z),
            name="mobius(to-halfline)",
        )
    raise ValueError(f"unknown mobius direction {direction!r}")


def compose(*fns: ScalarFunction) -> ScalarFunction:
    """``compose(f, g)(t) = g(f(t))``: functions are applied left to right."""
    if not fns:
        raise ValueError("compose needs at least one function")
    out = fns[0]
    for g in fns[1:]:
        out = _compose2(out, g)
    return out


def _compose2(f: ScalarFunction, g: ScalarFunction) -> ScalarFunction:
    def d1(t):
        return np.asarray(g.deriv(f.func(t))) * np.asarray(f.deriv(t))

    def d2(t):
        u = f.func(t)
        fp = np.asarray(f.deriv(t))
        return np.asarray(g.deriv2(u)) * fp * fp + np.asarray(g.deriv(u)) * np.asarray(f.deriv2(t))

    cf = None
    if f.cfunc is not None and g.cfunc is not None:
        cf = lambda z: g.cfunc(f.cfunc(z))  # noqa: E731
    return ScalarFunction(
        lambda t: g.func(f.func(t)),
        f.domain,
        d1,
        d2,
        cf,
        name=f"{g.name}∘{f.name}",
    )


def catalog_lookup(name: str, params: dict | None = None) -> ScalarFunction:
    """Build a catalog function by name; see :data:`CATALOG`."""
    params = dict(params or {})

    def take(key, default=None, required=False):
        if key in params:
            return params.pop(key)
        if required:
            raise ValueError(f"{name!r} needs parameter {key!r}")
        return default

    if name == "const":
        f = constant(float(take("c") if "c" in params else take("value", 1.0)))
    elif name in ("id", "identity"):
        f = identity()
    elif name == "affine":
        f = affine(float(take("a", 1.0)), float(take("b", 0.0)))
    elif name == "power":
        f = power(float(take("p", required=True)))
    elif name == "sqrt":
        f = power(0.5).renamed("sqrt")
    elif name == "log":
        f = log()
    elif name == "log1p":
        f = log1p()
    elif name == "square":
        f = poly([0, 0, 1]).renamed("square")
    elif name == "cube":
        f = poly([0, 0, 0, 1]).renamed("cube")
    elif name == "exp":
        f = exp()
    elif name in ("extreme", "mobius_lambda"):
        f = extreme(float(take("lambda") if "lambda" in params else take("lam", required=True)))
    elif name == "mobius":
        f = mobius(str(take("direction", "to-unit")))
    elif name == "poly":
        coeffs = take("coeffs", required=True)
        if not coeffs:
            raise ValueError("poly needs at least one coefficient")
        f = poly(coeffs)
    elif name == "compose":
        f = compose(*[from_spec(s) for s in take("fns", required=True)])
    else:
        raise ValueError(f"unknown catalog function {name!r}; known: {', '.join(CATALOG)}")
    domain = take("domain")
    if domain is not None:
        f = f.restrict(Interval.from_json(domain))
    if params:
        raise ValueError(f"unexpected parameters for {name!r}: {sorted(params)}")
    return f


def from_spec(spec) -> ScalarFunction:
    """Build a function from its JSON spec (see module docstring)."""
    if isinstance(spec, ScalarFunction):
        return spec
    if isinstance(spec, str):
        return catalog_lookup(spec)
    if not isinstance(spec, dict):
        raise ValueError(f"invalid function spec {spec!r}")
    spec = dict(spec)
    if "compose" in spec:
        f = compose(*[from_spec(s) for s in spec.pop("compose")])
    elif "affine" in spec:
        ab = spec.pop("affine")
        f = affine(float(ab.get("a", 1.0)), float(ab.get("b", 0.0)))
    elif "transform" in spec:
        from .transforms import apply_named

        op = spec.pop("transform")
        f = apply_named(op, from_spec(spec.pop("of")))
    elif "fn" in spec:
        name = spec.pop("fn")
        params = spec.pop("params", {})
        params.update({k: v for k, v in spec.items() if k != "domain"})
        if "domain" in spec:
            params["domain"] = spec["domain"]
        return catalog_lookup(name, params)
    else:
        raise ValueError(f"invalid function spec {spec!r}")
    if "domain" in spec:
        f = f.restrict(Interval.from_json(spec.pop("domain")))
    return f
