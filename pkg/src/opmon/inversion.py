"""Recovering representing measures from function values.

Three instruments:

* :func:`fit_measure` - non-negative least squares on a kernel design matrix;
* :func:`stieltjes_functional` / :func:`density_scan` - boundary values
  ``(1/pi) Im f(-t + i eps)`` just above the cut;
* :func:`moment_probe` - ``p(Lambda) f``, which reweights the measure by ``p``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate, optimize

from .errors import EvaluationError
from .functions import ScalarFunction
from .representations import PickRepresentation, RepresentingMeasure, eval_pick, kernel
from .transforms import poly_lambda

DEFAULT_RESIDUAL_THRESHOLD = 1e-3


@dataclass(frozen=True, eq=False)
class SampleSet:
    t: np.ndarray
    values: np.ndarray
    weights: Optional[np.ndarray] = None

    def __post_init__(self):
        t = np.array(self.t, dtype=float).ravel()
        v = np.array(self.values, dtype=float).ravel()
        if t.shape != v.shape:
            raise ValueError("t and values differ in length")
        if np.any(~(t > 0)):
            raise ValueError("sample points must be strictly positive")
        if np.unique(t).size != t.size:
            raise ValueError("sample points must be distinct")
        if not np.all(np.isfinite(v)):
            raise ValueError("sample values must be finite")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "values", v)
        if self.weights is not None:
            w = np.array(self.weights, dtype=float).ravel()
            if w.shape != t.shape or np.any(w < 0):
                raise ValueError("weights must be non-negative, one per sample")
            object.__setattr__(self, "weights", w)

    def __len__(self):
        return self.t.size

    @classmethod
    def from_function(cls, f: Callable, ts) -> "SampleSet":
        ts = np.asarray(ts, dtype=float)
        return cls(ts, np.asarray(f(ts), dtype=float))

    @classmethod
    def from_csv(cls, text: str) -> "SampleSet":
        rows = [r for r in csv.reader(io.StringIO(text)) if r and not r[0].lstrip().startswith("#")]
        try:
            float(rows[0][0])
        except ValueError:
            rows = rows[1:]  # header
        data = np.array([[float(x) for x in r[:3]] for r in rows])
        return cls(data[:, 0], data[:, 1], data[:, 2] if data.shape[1] > 2 else None)

    @classmethod
    def from_json(cls, obj) -> "SampleSet":
        if isinstance(obj, str):
            obj = json.loads(obj)
        if isinstance(obj, list):
            arr = np.asarray(obj, dtype=float)
            return cls(arr[:, 0], arr[:, 1])
        return cls(obj["t"], obj["f"] if "f" in obj else obj["values"], obj.get("weights"))


@dataclass
class MeasureFit:
    """A fitted measure together with its residual report."""

    measure: RepresentingMeasure
    rms_residual: float
    max_rel_residual: float
    threshold: float
    candidate_atoms: list = field(default_factory=list)

    @property
    def warning(self) -> bool:
        return self.max_rel_residual > self.threshold

    def to_json(self) -> dict:
        return {
            "measure": self.measure.to_json(),
            "residual": {
                "rms": self.rms_residual,
                "max_rel": self.max_rel_residual,
                "threshold": self.threshold,
                "warning": self.warning,
            },
            "total_mass": self.measure.total_mass(),
            "candidate_atoms": self.candidate_atoms,
        }


def design_matrix(t, nodes, kind: str) -> np.ndarray:
    """Kernel columns for the nodes followed by the two endpoint columns (1 and t)."""
    t = np.asarray(t, dtype=float)
    return np.column_stack([kernel(kind, t[:, None], np.asarray(nodes)[None, :]), np.ones_like(t), t])


def _candidate_atoms(nodes, weights, factor=10.0):
    out = []
    for j, w in enumerate(weights):
        if w <= 0:
            continue
        nb = [weights[k] for k in (j - 1, j + 1) if 0 <= k < len(weights)]
        if not nb or w > factor * (sum(nb) / len(nb)):
            out.append({"node": float(nodes[j]), "mass": float(w)})
    return out


def fit_measure(
    samples: SampleSet,
    nodes,
    kind: str = "half-line",
    threshold: float = DEFAULT_RESIDUAL_THRESHOLD,
    ridge: float = 0.0,
) -> MeasureFit:
    """Non-negative least-squares fit of a discrete representing measure.

    ``nodes`` are interior support points; the atoms at 0 and at 1 (or
    infinity) are always added as two extra columns.  A maximal relative
    residual above ``threshold`` sets the fit's ``warning`` flag; it usually
    means the sampled function is not operator monotone.
    """
    if kind not in ("unit-interval", "half-line"):
        raise ValueError(f"cannot fit a {kind!r} measure")
    if len(samples) < 2:
        raise ValueError("need at least two samples")
    nodes = np.asarray(nodes, dtype=float).ravel()
    upper = 1.0 if kind == "unit-interval" else np.inf
    if np.any(~((nodes > 0) & (nodes < upper))):
        raise ValueError(f"nodes must lie strictly inside the support of a {kind} measure")
    a = design_matrix(samples.t, nodes, kind)
    b = samples.values
    if samples.weights is not None:
        sw = np.sqrt(samples.weights)
        a_w, b_w = a * sw[:, None], b * sw
    else:
        a_w, b_w = a, b
    colnorm = np.linalg.norm(a_w, axis=0)
    colnorm[colnorm == 0] = 1.0
    a_s = a_w / colnorm
    if ridge > 0:
        a_s = np.vstack([a_s, math.sqrt(ridge) * np.eye(a_s.shape[1])])
        b_w = np.concatenate([b_w, np.zeros(a_s.shape[1])])
    x, _ = optimize.nnls(a_s, b_w, maxiter=50 * a_s.shape[1])
    x = x / colnorm
    mu = RepresentingMeasure(kind, nodes, x[:-2], atom0=x[-2], atom_end=x[-1])
    r = a @ x - b
    rel = np.abs(r) / np.maximum(np.abs(b), np.finfo(float).tiny)
    return MeasureFit(
        mu,
        float(np.sqrt(np.mean(r**2))),
        float(np.max(rel)),
        threshold,
        _candidate_atoms(nodes, x[:-2]),
    )


def parse_node_spec(spec: str) -> np.ndarray:
    """``log:m:lo:hi`` or ``lin:m:lo:hi`` or a comma separated list."""
    parts = spec.split(":")
    if parts[0] in ("log", "lin") and len(parts) == 4:
        m, lo, hi = int(parts[1]), float(parts[2]), float(parts[3])
        return np.geomspace(lo, hi, m) if parts[0] == "log" else np.linspace(lo, hi, m)
    return np.array([float(x) for x in spec.split(",") if x.strip()])


# -- test functions -------------------------------------------------------------


@dataclass(frozen=True)
class TestFunction:
    """A function on [0, inf) together with the (closed) support it vanishes outside."""

    __test__ = False  # not a pytest class

    func: Callable = field(repr=False)
    support: Optional[tuple] = None
    name: str = "g"

    def __call__(self, t):
        return self.func(np.asarray(t, dtype=float))


def _psi(u):
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    pos = u > 0
    out[pos] = np.exp(-1.0 / u[pos])
    return out


def bump(center: float, halfwidth: float) -> TestFunction:
    """Smooth bump of height 1 at ``center``, vanishing outside ``center +- halfwidth``."""

    def g(t):
        s = (t - center) / halfwidth
        out = np.zeros_like(s)
        inside = np.abs(s) < 1
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
        return out

    return TestFunction(g, (max(0.0, center - halfwidth), center + halfwidth), f"bump({center:g},{halfwidth:g})")


def smooth_step(x):
    """C-infinity step from 0 (x <= -1) to 1 (x >= 1) with ``step(x) + step(-x) = 1``."""
    a, b = _psi(1 + np.asarray(x, dtype=float)), _psi(1 - np.asarray(x, dtype=float))
    return a / (a + b)


def smooth_indicator(a: float, b: float, width: float) -> TestFunction:
    """Smoothed indicator of ``[a, b]`` whose integral is exactly ``b - a``."""
    if not b - a > 2 * width > 0:
        raise ValueError("need b - a > 2 * width > 0")

    def g(t):
        return smooth_step((t - a) / width) - smooth_step((t - b) / width)

    return TestFunction(g, (max(0.0, a - width), b + width), f"indicator({a:g},{b:g})")


# -- Stieltjes inversion ------------------------------------------------------------


def _boundary_im(f):
    if isinstance(f, PickRepresentation):
        return lambda z: np.asarray(eval_pick(f, z)).imag, _pick_peaks(f)
    if isinstance(f, ScalarFunction):
        if f.cfunc is None:
            raise EvaluationError(f"{f.name} has no complex evaluator")
        return lambda z: np.asarray(f.complex(z)).imag, []
    raise TypeError("expected a ScalarFunction or a PickRepresentation")


def _pick_peaks(rep: PickRepresentation):
    peaks = list(rep.nu.nodes[rep.nu.weights > 0])
    if rep.nu.atom0 > 0:
        peaks.append(0.0)
    return peaks


def density_scan(f, t_grid, epsilon: float) -> np.ndarray:
    """``(1/pi) Im f(-l + i eps)`` over the grid: the eps-broadened density of nu."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    im, _ = _boundary_im(f)
    t = np.asarray(t_grid, dtype=float)
    return im(-t + 1j * epsilon) / math.pi


def stieltjes_functional(
    f,
    g: Callable,
    epsilon: float,
    support: Optional[tuple] = None,
    peaks=None,
    max_scan: int = 2_000_000,
) -> float:
    """``(1/pi) int_0^inf Im f(-t + i eps) g(t) dt`` by piecewise adaptive quadrature.

    Breakpoints cluster at known atoms of ``nu`` (for Pick representations),
    at caller supplied ``peaks`` and at local maxima found by scanning the
    integrand at spacing ``eps/2``.  Without a bounded support the integral
    is truncated where the integrand drops below ``1e-12`` of its peak.
    """
    eps = float(epsilon)
    if not eps > 0:
        raise ValueError("epsilon must be positive")
    im, known = _boundary_im(f)

    def integrand(t):
        t = np.asarray(t, dtype=float)
        return im(-t + 1j * eps) * np.asarray(g(t)) / math.pi

    support = support if support is not None else getattr(g, "support", None)
    if support is not None:
        lo, hi = max(0.0, float(support[0])), float(support[1])
    else:
        lo, hi = 0.0, 100.0
        probe = np.geomspace(eps, hi, 2000)
        peak = np.max(np.abs(integrand(probe))) if probe.size else 0.0
        while abs(float(integrand(hi))) > 1e-12 * max(peak, 1e-300) and hi < 1e8:
            hi *= 2
    if hi <= lo:
        return 0.0

    centers = [c for c in list(known) + list(peaks or []) if lo - 100 * eps <= c <= hi + 100 * eps]
    npts = int(min(max_scan, max(2000, 2 * (hi - lo) / eps)))
    scan = np.linspace(lo, hi, npts)
    vals = np.abs(integrand(scan))
    if vals.size >= 3:
        interior = (vals[1:-1] > vals[:-2]) & (vals[1:-1] >= vals[2:]) & (vals[1:-1] > 1e-6 * vals.max())
        idx = np.flatnonzero(interior) + 1
        idx = idx[np.argsort(vals[idx])[::-1][:100]]
        centers.extend(scan[idx].tolist())
    bps = {lo, hi}
    for c in centers:
        for k in (0.0, 1.0, 10.0, 100.0):
            for p in (c - k * eps, c + k * eps):
                if lo < p < hi:
                    bps.add(p)
    # resolve the region near the origin, where Im f(-t + i eps) may change fast
    for k in (1.0, 10.0, 100.0):
        if lo < k * eps < hi:
            bps.add(k * eps)
    edges = sorted(bps)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        total += integrate.quad(lambda t: float(integrand(t)), a, b, epsabs=1e-13, epsrel=1e-11, limit=200)[0]
    return total


def moment_probe(f: ScalarFunction, coeffs, t_probe) -> np.ndarray:
    """``p(Lambda)(f)`` at the probe points; equals ``f`` with measure reweighted by ``p``."""
    return np.asarray(poly_lambda(coeffs, f)(np.asarray(t_probe, dtype=float)))


def reweighted_measure(mu: RepresentingMeasure, coeffs) -> RepresentingMeasure:
    """``p(l) dmu(l)`` for a unit-interval measure (the endpoint atoms sit at l = 0 and l = 1)."""
    if mu.kind != "unit-interval":
        raise ValueError("reweighting is defined on the unit-interval form")
    p = np.polynomial.Polynomial(coeffs)
    return RepresentingMeasure(mu.kind, mu.nodes, mu.weights * p(mu.nodes), mu.atom0 * p(0.0), mu.atom_end * p(1.0))
