"""Randomised certificates for n-monotonicity and n-convexity.

A function is n-monotone iff all its n-point Loewner matrices are PSD and
n-convex iff all its Kraus matrices are PSD.  The checks below sample grids,
so a ``pass`` is evidence and a ``fail`` is a proof (the witness can be
re-verified with :func:`verify_witness`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import integrate

from .divided import _dd1, _dd2, kraus_batch, loewner_batch
from .errors import DomainError, EvaluationError
from .functions import ScalarFunction
from .hermitian import (
    DEFAULT_TOL,
    HermitianMatrix,
    Interval,
    apply_function,
    sample_ordered_pair,
)

LAYOUTS = ("uniform", "log-uniform", "near-confluent")
NEAR_GAP = 1e-6


@dataclass
class Certificate:
    verdict: str  # "pass" | "fail"
    n: int
    trials: int
    min_eigenvalue: float
    seed: int
    check: str = "monotone"  # "monotone" | "convex" | "concave"
    min_ratio: float = 0.0  # min eigenvalue / matrix scale
    witness: Optional[dict] = None
    function: str = ""
    interval: Optional[Interval] = None
    tol: float = DEFAULT_TOL

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_json(self) -> dict:
        out = {
            "verdict": self.verdict,
            "check": self.check,
            "function": self.function,
            "interval": None if self.interval is None else self.interval.to_json(),
            "n": self.n,
            "trials": self.trials,
            "min_eig": self.min_eigenvalue,
            "min_ratio": self.min_ratio,
            "tol": self.tol,
            "seed": self.seed,
        }
        if self.witness is not None:
            out["witness"] = self.witness
        return out


def _node_window(interval: Interval):
    lo, hi = interval.window()
    return lo, hi


def _log_layout(interval: Interval, size, rng):
    lo, hi = _node_window(interval)
    length = hi - lo
    off = np.exp(rng.uniform(math.log(1e-5 * length), math.log(length), size=size))
    if math.isinf(interval.lower) and math.isinf(interval.upper):
        sign = rng.choice([-1.0, 1.0], size=size)
        return np.clip(sign * off / 2, lo, hi)
    if math.isinf(interval.lower):
        return np.clip(hi - off, lo, hi)
    return np.clip(lo + off, lo, hi)


def sample_grids(interval: Interval, n: int, trials: int, seed: int) -> np.ndarray:
    """``trials`` grids of ``n`` nodes, cycling through the three layouts.

    Layouts: uniform on the sampling window, log-uniform distance from the
    finite end, and a uniform/log-uniform grid whose first two nodes are
    ``1e-6`` apart (relative).
    """
    if n < 1 or trials < 1:
        raise ValueError("n and trials must be >= 1")
    rng = np.random.default_rng(seed)
    lo, hi = _node_window(interval)
    grids = np.empty((trials, n))
    for k in range(trials):
        layout = LAYOUTS[k % 3]
        if layout == "uniform":
            g = rng.uniform(lo, hi, size=n)
        elif layout == "log-uniform":
            g = _log_layout(interval, n, rng)
        else:
            g = rng.uniform(lo, hi, size=n) if rng.random() < 0.5 else _log_layout(interval, n, rng)
            if n >= 2:
                gap = NEAR_GAP * max(1.0, abs(g[0]))
                g[1] = g[0] + gap if g[0] + gap < hi else g[0] - gap
        grids[k] = g
    return grids


def _resolve_interval(f: ScalarFunction, interval) -> Interval:
    if interval is None:
        return f.domain
    if isinstance(interval, str):
        interval = Interval.parse(interval)
    if not f.domain.contains_interval(interval):
        raise DomainError(f"{interval} is not inside the domain {f.domain} of {f.name}")
    return interval


def _scale(mats: np.ndarray) -> np.ndarray:
    return np.max(np.abs(mats), axis=(-2, -1))


def _kraus_floor(f: ScalarFunction, grids: np.ndarray) -> np.ndarray:
    # Kraus entries of a (nearly) affine f are pure rounding noise of size
    # ~eps * |[l_i, l_j]_f| / diameter; measuring them against this floor keeps
    # such functions from failing on noise
    diam = np.ptp(grids, axis=-1)
    lmax = _scale(loewner_batch(f, grids))
    return np.where(diam > 0, lmax / np.where(diam > 0, diam, 1.0), 0.0)


def check_monotone(
    f: ScalarFunction,
    interval=None,
    n: int = 2,
    trials: int = 500,
    seed: int = 0,
    tol: float = DEFAULT_TOL,
) -> Certificate:
    """Sample Loewner matrices of ``f``; fail at the first one with an eigenvalue below ``-tol * scale``."""
    interval = _resolve_interval(f, interval)
    grids = sample_grids(interval, n, trials, seed)
    mats = loewner_batch(f, grids)
    w, v = np.linalg.eigh(mats)
    scale = _scale(mats)
    w0 = w[:, 0]
    bad = np.flatnonzero(w0 < -tol * scale)
    upto = bad[0] + 1 if bad.size else trials
    ratios = np.where(scale > 0, w0 / np.where(scale > 0, scale, 1.0), 0.0)[:upto]
    cert = Certificate(
        verdict="fail" if bad.size else "pass",
        n=n,
        trials=int(upto),
        min_eigenvalue=float(np.min(w0[:upto])),
        seed=seed,
        check="monotone",
        min_ratio=float(np.min(ratios)),
        function=f.name,
        interval=interval,
        tol=tol,
    )
    if bad.size:
        k = bad[0]
        cert.witness = {
            "type": "loewner",
            "trial": int(k),
            "grid": grids[k].tolist(),
            "eigenvalue": float(w0[k]),
            "eigenvector": v[k][:, 0].tolist(),
            "scale": float(scale[k]),
        }
    return cert


def check_convex(
    f: ScalarFunction,
    interval=None,
    n: int = 2,
    trials: int = 500,
    seed: int = 0,
    concave_flag: bool = False,
    tol: float = DEFAULT_TOL,
) -> Certificate:
    """Sample Kraus matrices of ``f`` (of ``-f`` with ``concave_flag``)."""
    interval = _resolve_interval(f, interval)
    g = -f if concave_flag else f
    grids = sample_grids(interval, n, trials, seed)
    mats = kraus_batch(g, grids)  # (trials, p, n, n)
    w, v = np.linalg.eigh(mats)
    scale = np.maximum(_scale(mats), _kraus_floor(g, grids)[:, None])
    thresh = -tol * scale
    w0 = w[..., 0]
    trial_bad = np.any(w0 < thresh, axis=1)
    bad = np.flatnonzero(trial_bad)
    upto = bad[0] + 1 if bad.size else trials
    ratios = np.where(scale > 0, w0 / np.where(scale > 0, scale, 1.0), 0.0)[:upto]
    cert = Certificate(
        verdict="fail" if bad.size else "pass",
        n=n,
        trials=int(upto),
        min_eigenvalue=float(np.min(w0[:upto])),
        seed=seed,
        check="concave" if concave_flag else "convex",
        min_ratio=float(np.min(ratios)),
        function=f.name,
        interval=interval,
        tol=tol,
    )
    if bad.size:
        k = bad[0]
        p = int(np.argmin(w0[k] - thresh[k]))
        cert.witness = {
            "type": "kraus",
            "trial": int(k),
            "grid": grids[k].tolist(),
            "p": p,
            "eigenvalue": float(w0[k, p]),
            "eigenvector": v[k, p][:, 0].tolist(),
            "scale": float(scale[k, p]),
        }
    return cert


def verify_witness(cert: Certificate, f: ScalarFunction, tol: float | None = None) -> bool:
    """Recompute the witness matrix from scratch and confirm the negative eigenvalue."""
    if cert.witness is None:
        return False
    tol = cert.tol if tol is None else tol
    wit = cert.witness
    if wit["type"] == "pair":
        x = HermitianMatrix.from_json(wit["x"])
        y = HermitianMatrix.from_json(wit["y"])
        return pair_violation(f, x, y, tol) < 0
    grid = np.asarray(wit["grid"])
    if wit["type"] == "loewner":
        m = loewner_batch(f, grid)
        scale = np.max(np.abs(m))
    else:
        g = -f if cert.check == "concave" else f
        m = kraus_batch(g, grid)[wit["p"]]
        scale = max(np.max(np.abs(m)), float(_kraus_floor(g, grid[None, :])[0]))
    w = np.linalg.eigvalsh(m)[0]
    return bool(w < -tol * scale)


def pair_violation(f: ScalarFunction, x, y, tol: float = DEFAULT_TOL) -> float:
    """``min eig(f(y) - f(x)) + tol * max(1, scale)``; negative means ``f(x) <= f(y)`` is violated."""
    d = apply_function(f, y).entries - apply_function(f, x).entries
    w = np.linalg.eigvalsh(d)[0]
    return float(w + tol * max(1.0, float(np.max(np.abs(d)))))


def counterexample_pair(
    f: ScalarFunction,
    interval=None,
    n: int = 2,
    budget: int = 100,
    seed: int = 0,
    tol: float = DEFAULT_TOL,
) -> Optional[tuple[HermitianMatrix, HermitianMatrix]]:
    """Search for ``x <= y`` with ``f(x) <= f(y)`` violated.

    The first half of the budget draws general ordered pairs, the second half
    rank-one bumps ``y = x + c p p*``.  Returns the pair with the most negative
    eigenvalue of ``f(y) - f(x)``, or ``None``.
    """
    interval = _resolve_interval(f, interval)
    if budget < 1:
        raise ValueError("budget must be >= 1")
    children = np.random.SeedSequence(seed).generate_state(budget)
    best, best_val = None, 0.0
    for i, child in enumerate(children):
        rank = None if i < (budget + 1) // 2 else 1
        x, y = sample_ordered_pair(interval, n, int(child), rank=rank)
        d = apply_function(f, y).entries - apply_function(f, x).entries
        w = float(np.linalg.eigvalsh(d)[0])
        if w < -tol * max(1.0, float(np.max(np.abs(d)))) and w < best_val:
            best, best_val = (x, y), w
    return best


def pair_certificate(f: ScalarFunction, interval=None, n=2, budget=100, seed=0, tol=DEFAULT_TOL) -> Certificate:
    """:func:`counterexample_pair` packaged as a :class:`Certificate`."""
    interval = _resolve_interval(f, interval)
    pair = counterexample_pair(f, interval, n, budget, seed, tol)
    cert = Certificate("pass", n, budget, 0.0, seed, check="monotone-pair", function=f.name, interval=interval, tol=tol)
    if pair is not None:
        x, y = pair
        d = apply_function(f, y).entries - apply_function(f, x).entries
        cert.verdict = "fail"
        cert.min_eigenvalue = float(np.linalg.eigvalsh(d)[0])
        cert.min_ratio = cert.min_eigenvalue / max(1.0, float(np.max(np.abs(d))))
        cert.witness = {"type": "pair", "x": x.to_json(), "y": y.to_json()}
    return cert


# -- regularisation ------------------------------------------------------------


def _bump(s):
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1
    out[inside] = np.exp(-1.0 / (1.0 - s[inside] ** 2))
    return out


_BUMP_MASS = integrate.quad(lambda s: float(_bump(s)), -1, 1, epsabs=1e-14, epsrel=1e-12)[0]


def mollifier(s):
    """Even C-infinity bump on [-1, 1] with unit integral."""
    return _bump(s) / _BUMP_MASS


def mollifier_deriv(s):
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1
    si = s[inside]
    out[inside] = np.exp(-1.0 / (1.0 - si**2)) * (-2 * si / (1 - si**2) ** 2) / _BUMP_MASS
    return out


_QUAD = dict(epsabs=1e-11, epsrel=1e-11, limit=200)


def mollify(f: ScalarFunction, epsilon: float) -> ScalarFunction:
    """``f_eps(t) = int phi(s) f(t - eps s) ds`` on the shrunken domain ``(a + eps, b - eps)``.

    Adaptive Gauss-Kronrod quadrature (open rule, so the bump's endpoints are
    never evaluated).  The derivative is the exact derivative of the
    convolution, ``(1/eps) int phi'(s) f(t - eps s) ds``, and so exists even
    where ``f`` itself is not differentiable.
    """
    eps = float(epsilon)
    if not eps > 0:
        raise ValueError("epsilon must be positive")
    if 2 * eps >= f.domain.length:
        raise DomainError(f"epsilon={eps} exceeds half the length of {f.domain}")
    domain = f.domain.shrink(eps)

    def scalar_value(t):
        ft = float(f(t))
        r = integrate.quad(lambda s: float(mollifier(s)) * (float(f(t - eps * s)) - ft), -1, 1, **_QUAD)[0]
        return ft + r

    def scalar_deriv(t):
        ft = float(f(t))
        r = integrate.quad(lambda s: float(mollifier_deriv(s)) * (float(f(t - eps * s)) - ft), -1, 1, **_QUAD)[0]
        return r / eps

    def vec(fn):
        def wrapped(t):
            t = np.asarray(t, dtype=float)
            out = np.array([fn(x) for x in t.ravel()])
            return _finite_check(out.reshape(t.shape), f.name)

        return wrapped

    return ScalarFunction(vec(scalar_value), domain, vec(scalar_deriv), None, None, name=f"mollify({f.name},{eps:g})")


def _finite_check(x, name):
    if not np.all(np.isfinite(x)):
        raise EvaluationError(f"mollified {name} is not finite")
    return x


# -- Bendat-Sherman slopes --------------------------------------------------------


def slope_function(f: ScalarFunction, t0: float) -> ScalarFunction:
    """``g(t) = (f(t) - f(t0)) / (t - t0)`` with ``g(t0) = f'(t0)``."""
    t0 = float(t0)
    if not f.domain.contains(t0):
        raise DomainError(f"t0={t0} outside {f.domain}")
    fp = f.deriv(t0)
    if not math.isfinite(fp):
        raise EvaluationError(f"{f.name} is not differentiable at t0={t0}")
    cf = None
    if f.cfunc is not None:
        f0 = complex(f.cfunc(np.asarray(t0 + 0j)))

        def cf(z):
            z = np.asarray(z, dtype=complex)
            with np.errstate(invalid="ignore", divide="ignore"):
                out = (np.asarray(f.cfunc(z)) - f0) / (z - t0)
            return np.where(z == t0, fp, out)

    return ScalarFunction(
        lambda t: _dd1(f, t, t0),
        f.domain,
        lambda t: _dd2(f, t, t, t0),
        None,
        cf,
        name=f"slope({f.name},{t0:g})",
    )


# -- monotone <-> concave cross-checks ----------------------------------------------


def monotone_implies_concave(f: ScalarFunction, interval=None, n: int = 2, trials: int = 200, seed: int = 0):
    """Check 2n-monotonicity and n-concavity on the same seed.

    Returns ``(monotone_cert, concave_cert)``; for functions on a half-line
    ending at +infinity a pass of the first should come with a pass of the second.
    """
    mono = check_monotone(f, interval, 2 * n, trials, seed)
    conc = check_convex(f, interval, n, trials, seed, concave_flag=True)
    return mono, conc


def concave_implies_monotone(f: ScalarFunction, interval=None, n: int = 2, trials: int = 200, seed: int = 0):
    """For non-negative f on (0, inf): n-concavity should come with n-monotonicity.

    Returns ``(concave_cert, monotone_cert)``.
    """
    conc = check_convex(f, interval, n, trials, seed, concave_flag=True)
    mono = check_monotone(f, interval, n, trials, seed)
    return conc, mono
