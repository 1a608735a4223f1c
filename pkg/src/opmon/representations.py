"""Integral representations of operator monotone functions on (0, inf).

Three kernels are supported:

* ``unit-interval``: ``f(t) = int_[0,1] t / (l + (1-l) t) dmu(l)``
* ``half-line``:     ``f(t) = int_[0,inf] t (1+l) / (t + l) dmu(l)``
* ``pick``:          ``f(t) = a t + b + int_[0,inf) (l/(1+l^2) - 1/(t+l)) dnu(l)``

Measures are finite sums of atoms.  Endpoint masses are kept apart from the
interior nodes because the kernel degenerates there: mass at 0 contributes a
constant, mass at 1 (resp. infinity) a multiple of ``t``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DomainError
from .functions import ScalarFunction
from .hermitian import HALF_LINE

KINDS = ("unit-interval", "half-line", "pick")


@dataclass(frozen=True, eq=False)
class RepresentingMeasure:
    kind: str
    nodes: np.ndarray = field(default_factory=lambda: np.zeros(0))
    weights: np.ndarray = field(default_factory=lambda: np.zeros(0))
    atom0: float = 0.0
    atom_end: float = 0.0  # mass at 1 (unit-interval) or at infinity (half-line)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown measure kind {self.kind!r}")
        nodes = np.array(self.nodes, dtype=float).ravel()
        weights = np.array(self.weights, dtype=float).ravel()
        if nodes.shape != weights.shape:
            raise ValueError("nodes and weights differ in length")
        if np.any(weights < 0) or self.atom0 < 0 or self.atom_end < 0:
            raise ValueError("measure weights must be non-negative")
        if not (np.all(np.isfinite(weights)) and np.isfinite(self.atom0) and np.isfinite(self.atom_end)):
            raise ValueError("measure weights must be finite")
        upper = 1.0 if self.kind == "unit-interval" else np.inf
        if np.any(~((nodes > 0) & (nodes < upper))):
            raise ValueError(f"{self.kind} nodes must lie strictly inside (0, {upper}); use the endpoint atoms")
        if self.kind == "pick" and self.atom_end != 0:
            raise ValueError("a pick measure has no mass at infinity (that is the slope alpha)")
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "atom0", float(self.atom0))
        object.__setattr__(self, "atom_end", float(self.atom_end))

    def total_mass(self) -> float:
        return float(np.sum(self.weights) + self.atom0 + self.atom_end)

    def is_probability(self, tol: float = 1e-12) -> bool:
        return abs(self.total_mass() - 1.0) < tol

    def scaled(self, c: float) -> "RepresentingMeasure":
        return replace(self, weights=c * self.weights, atom0=c * self.atom0, atom_end=c * self.atom_end)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "nodes": self.nodes.tolist(),
            "weights": self.weights.tolist(),
            "atom0": self.atom0,
            "atom1_or_inf": self.atom_end,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "RepresentingMeasure":
        return cls(
            obj["kind"],
            obj.get("nodes", []),
            obj.get("weights", []),
            float(obj.get("atom0", 0.0)),
            float(obj.get("atom1_or_inf", 0.0)),
        )


@dataclass(frozen=True, eq=False)
class PickRepresentation:
    alpha: float
    beta: float
    nu: RepresentingMeasure

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be non-negative")
        if self.nu.kind != "pick":
            raise ValueError("nu must be a pick measure")

    def __call__(self, t):
        return eval_pick(self, t).real

    def to_json(self) -> dict:
        out = self.nu.to_json()
        out.update(alpha=self.alpha, beta=self.beta)
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "PickRepresentation":
        obj = dict(obj)
        obj.setdefault("kind", "pick")
        return cls(float(obj["alpha"]), float(obj["beta"]), RepresentingMeasure.from_json(obj))


def kernel(kind: str, t, lam):
    """The kernel ``K(t, lam)`` of the unit-interval or half-line representation."""
    t, lam = np.asarray(t, dtype=float), np.asarray(lam, dtype=float)
    if kind == "unit-interval":
        return t / (lam + (1 - lam) * t)
    if kind == "half-line":
        return t * (1 + lam) / (t + lam)
    raise ValueError(f"no positive kernel for kind {kind!r}")


def eval_measure(mu: RepresentingMeasure, t):
    """Evaluate the positive operator monotone function represented by ``mu``."""
    if mu.kind == "pick":
        raise ValueError("use eval_pick for pick representations")
    ta = np.asarray(t, dtype=float)
    if np.any(~(ta > 0)):
        raise DomainError("representations are evaluated at t > 0 only")
    k = kernel(mu.kind, ta[..., None], mu.nodes)
    out = k @ mu.weights + mu.atom0 + mu.atom_end * ta
    return float(out) if np.ndim(t) == 0 else out


def _kernel_terms(kind: str, z, lam):
    """Kernel and its first two t-derivatives; ``z`` may be complex."""
    if kind == "unit-interval":
        d = lam + (1 - lam) * z
        return z / d, lam / d**2, -2 * lam * (1 - lam) / d**3
    d = z + lam
    return z * (1 + lam) / d, lam * (1 + lam) / d**2, -2 * lam * (1 + lam) / d**3


def measure_function(mu: RepresentingMeasure, name: str = "f_mu") -> ScalarFunction:
    """The function represented by ``mu`` with exact derivatives and its analytic continuation."""
    if mu.kind == "pick":
        raise ValueError("use eval_pick for pick representations")

    def parts(z, k):
        za = np.asarray(z)
        out = _kernel_terms(mu.kind, za[..., None], mu.nodes)[k] @ mu.weights
        if k == 0:
            out = out + mu.atom0 + mu.atom_end * za
        elif k == 1:
            out = out + mu.atom_end
        return out

    return ScalarFunction(
        lambda t: parts(np.asarray(t, dtype=float), 0),
        HALF_LINE,
        lambda t: parts(np.asarray(t, dtype=float), 1),
        lambda t: parts(np.asarray(t, dtype=float), 2),
        lambda z: parts(np.asarray(z, dtype=complex), 0),
        name=name,
    )


def convert_measure(mu: RepresentingMeasure, target: str) -> RepresentingMeasure:
    """Move between the unit-interval and half-line forms via ``l -> l / (1 - l)``."""
    if mu.kind == target:
        return mu
    if mu.kind == "unit-interval" and target == "half-line":
        nodes = mu.nodes / (1 - mu.nodes)
    elif mu.kind == "half-line" and target == "unit-interval":
        nodes = mu.nodes / (1 + mu.nodes)
    else:
        raise ValueError(f"cannot convert {mu.kind} to {target}")
    return RepresentingMeasure(target, nodes, mu.weights, mu.atom0, mu.atom_end)


def to_pick(f1: float, fp1: float, mu: RepresentingMeasure, tol: float = 1e-9) -> PickRepresentation:
    """Pick data ``(alpha, beta, nu)`` of ``f = f1 + fp1 (t-1)/t Tf``, where ``mu`` represents ``Tf``.

    ``mu`` must be a half-line probability measure (``Tf(1) = 1``).
    """
    if mu.kind == "unit-interval":
        mu = convert_measure(mu, "half-line")
    if mu.kind != "half-line":
        raise ValueError("to_pick needs a half-line (or unit-interval) measure")
    if abs(mu.total_mass() - 1.0) > tol:
        raise ValueError(f"measure of Tf must be a probability measure, total mass {mu.total_mass():.12g}")
    if fp1 < 0:
        raise ValueError("f'(1) must be non-negative")
    lam, w = mu.nodes, mu.weights
    alpha = fp1 * mu.atom_end
    nu = RepresentingMeasure("pick", lam, fp1 * (1 + lam) ** 2 * w, atom0=fp1 * mu.atom0)
    beta = f1 - mu.atom_end * fp1 + fp1 * (float(np.sum((1 - lam**2) / (1 + lam**2) * w)) + mu.atom0)
    return PickRepresentation(alpha, beta, nu)


def pick_from_positive(mu: RepresentingMeasure) -> PickRepresentation:
    """Pick data of the positive function represented directly by ``mu``."""
    if mu.kind == "unit-interval":
        mu = convert_measure(mu, "half-line")
    if mu.kind != "half-line":
        raise ValueError("pick_from_positive needs a half-line (or unit-interval) measure")
    lam, w = mu.nodes, mu.weights
    nu = RepresentingMeasure("pick", lam, w * lam * (1 + lam))
    beta = mu.atom0 + float(np.sum(w * (1 + lam) / (1 + lam**2)))
    return PickRepresentation(mu.atom_end, beta, nu)


def eval_pick(rep: PickRepresentation, z):
    """Analytic continuation of the Pick form to ``C \\ (-inf, 0]`` (upper half-plane and real axis)."""
    za = np.asarray(z, dtype=complex)
    if np.any(za.imag < 0):
        raise DomainError("eval_pick is defined for Im z >= 0")
    if np.any((za.imag == 0) & (za.real <= 0)):
        raise DomainError("z lies on the cut (-inf, 0]")
    lam = rep.nu.nodes
    zz = za[..., None]
    terms = (lam / (1 + lam**2) - 1 / (zz + lam)) @ rep.nu.weights
    out = rep.alpha * za + rep.beta + terms
    if rep.nu.atom0:
        out = out - rep.nu.atom0 / za
    return complex(out) if np.ndim(z) == 0 else out


def upper_half_plane_grid(m: int = 200) -> np.ndarray:
    """``m`` points spread over the upper half-plane (real parts in [-20, 20], Im in [1e-3, 20])."""
    nre = max(1, int(np.ceil(np.sqrt(m * 2))))
    nim = max(1, int(np.ceil(m / nre)))
    re = np.linspace(-20, 20, nre)
    im = np.geomspace(1e-3, 20, nim)
    g = (re[:, None] + 1j * im[None, :]).ravel()
    return g[:m]


def discretize_density(density, kind: str, lo: float = 1e-4, hi: float = 1e4, m: int = 400) -> RepresentingMeasure:
    """Trapezoid discretisation of ``density(l) dl`` on ``m`` log-spaced nodes in ``[lo, hi]``."""
    lam = np.geomspace(lo, hi, m)
    u = np.log(lam)
    du = np.diff(u)
    w = np.zeros(m)
    w[:-1] += du / 2
    w[1:] += du / 2
    return RepresentingMeasure(kind, lam, w * lam * np.asarray(density(lam), dtype=float))
