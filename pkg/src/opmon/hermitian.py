"""Finite-dimensional spectral machinery.

Hermitian matrices, their eigensystems, the functional calculus
``f(x) = U diag(f(lambda)) U*``, the Loewner partial order and a seeded
generator of ordered matrix pairs ``x <= y``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError, SamplingError, SymmetryError

#: default relative tolerance for semidefiniteness tests
DEFAULT_TOL = 1e-9

_SYM_TOL = 1e-12


@dataclass(frozen=True)
class Interval:
    """An interval of any type; ``lower``/``upper`` may be infinite."""

    lower: float
    upper: float
    lower_open: bool = True
    upper_open: bool = True

    def __post_init__(self):
        lo, hi = float(self.lower), float(self.upper)
        if math.isnan(lo) or math.isnan(hi) or not lo < hi:
            raise ValueError(f"interval needs lower < upper, got ({lo}, {hi})")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def open(cls, lower: float, upper: float) -> "Interval":
        return cls(lower, upper, True, True)

    @classmethod
    def parse(cls, text: str) -> "Interval":
        """Parse ``"0,inf"``, ``"(0,1)"`` or ``"[0,1)"``; bare pairs are open."""
        text = text.strip()
        m = re.fullmatch(r"([\(\[]?)\s*([^,\s]+)\s*,\s*([^,\s\)\]]+)\s*([\)\]]?)", text)
        if not m:
            raise ValueError(f"cannot parse interval {text!r}")
        lo, hi = float(m.group(2)), float(m.group(3))
        return cls(lo, hi, m.group(1) != "[", m.group(4) != "]")

    @property
    def length(self) -> float:
        return self.upper - self.lower

    def contains(self, t):
        t = np.asarray(t)
        above = t > self.lower if self.lower_open else t >= self.lower
        below = t < self.upper if self.upper_open else t <= self.upper
        return above & below

    def contains_interval(self, other: "Interval") -> bool:
        lo_ok = other.lower > self.lower or (
            other.lower == self.lower and (other.lower_open or not self.lower_open)
        )
        hi_ok = other.upper < self.upper or (
            other.upper == self.upper and (other.upper_open or not self.upper_open)
        )
        return lo_ok and hi_ok

    def intersect(self, other: "Interval") -> "Interval":
        if self.lower > other.lower:
            lo, lo_open = self.lower, self.lower_open
        elif self.lower < other.lower:
            lo, lo_open = other.lower, other.lower_open
        else:
            lo, lo_open = self.lower, self.lower_open or other.lower_open
        if self.upper < other.upper:
            hi, hi_open = self.upper, self.upper_open
        elif self.upper > other.upper:
            hi, hi_open = other.upper, other.upper_open
        else:
            hi, hi_open = self.upper, self.upper_open or other.upper_open
        return Interval(lo, hi, lo_open, hi_open)

    def shrink(self, eps: float) -> "Interval":
        """The open interval ``(lower + eps, upper - eps)``."""
        return Interval(self.lower + eps, self.upper - eps, True, True)

    def window(self, span: float = 100.0) -> tuple[float, float]:
        """A finite sub-range strictly inside the interval used for random sampling.

        Infinite ends are cut off ``span`` away from the finite end (or from 0
        when both ends are infinite).
        """
        lo, hi = self.lower, self.upper
        if math.isinf(lo) and math.isinf(hi):
            lo, hi = -span / 2, span / 2
        elif math.isinf(hi):
            hi = lo + span
        elif math.isinf(lo):
            lo = hi - span
        margin = 1e-9 * (hi - lo)
        return lo + margin, hi - margin

    def to_json(self) -> dict:
        return {
            "lower": _enc(self.lower),
            "upper": _enc(self.upper),
            "lower_open": self.lower_open,
            "upper_open": self.upper_open,
        }

    @classmethod
    def from_json(cls, obj) -> "Interval":
        if isinstance(obj, str):
            return cls.parse(obj)
        if isinstance(obj, (list, tuple)):
            return cls(float(obj[0]), float(obj[1]))
        return cls(
            float(obj["lower"]),
            float(obj["upper"]),
            obj.get("lower_open", True),
            obj.get("upper_open", True),
        )

    def __str__(self):
        return "{}{}, {}{}".format(
            "(" if self.lower_open else "[",
            _enc(self.lower),
            _enc(self.upper),
            ")" if self.upper_open else "]",
        )


def _enc(x: float):
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


HALF_LINE = Interval(0.0, math.inf)
REAL_LINE = Interval(-math.inf, math.inf)
UNIT_INTERVAL = Interval(0.0, 1.0)


def _max_abs(a: np.ndarray) -> float:
    return float(np.max(np.abs(a))) if a.size else 0.0


@dataclass(frozen=True, eq=False)
class HermitianMatrix:
    """A dense Hermitian matrix; validated on construction, read-only afterwards."""

    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        a = np.array(self.entries)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise ValueError(f"expected a non-empty square matrix, got shape {a.shape}")
        if not np.iscomplexobj(a):
            a = a.astype(float)
        if not np.all(np.isfinite(a)):
            raise ValueError("matrix has non-finite entries")
        dev = _max_abs(a - a.conj().T)
        scale = _max_abs(a)
        if dev > _SYM_TOL * scale:
            i, j = np.unravel_index(np.argmax(np.abs(a - a.conj().T)), a.shape)
            raise SymmetryError(
                f"matrix is not Hermitian: |a[{i},{j}] - conj(a[{j},{i}])| = {dev:.3e} "
                f"exceeds {_SYM_TOL:g} * max|a| = {_SYM_TOL * scale:.3e}"
            )
        a = (a + a.conj().T) / 2
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)

    def __add__(self, other):
        return HermitianMatrix(self.entries + np.asarray(other))

    def __sub__(self, other):
        return HermitianMatrix(self.entries - np.asarray(other))

    def scale(self, c: float) -> "HermitianMatrix":
        return HermitianMatrix(float(c) * self.entries)

    def max_abs(self) -> float:
        return _max_abs(self.entries)

    def to_json(self) -> dict:
        out = {"dim": self.dim, "re": self.entries.real.tolist()}
        if np.iscomplexobj(self.entries) and np.any(self.entries.imag != 0):
            out["im"] = self.entries.imag.tolist()
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "HermitianMatrix":
        re_part = np.asarray(obj["re"], dtype=float)
        if "dim" in obj and re_part.shape != (obj["dim"], obj["dim"]):
            raise ValueError(f"'re' has shape {re_part.shape}, expected dim {obj['dim']}")
        if obj.get("im") is not None:
            return cls(re_part + 1j * np.asarray(obj["im"], dtype=float))
        return cls(re_part)


def as_hermitian(h) -> HermitianMatrix:
    return h if isinstance(h, HermitianMatrix) else HermitianMatrix(np.asarray(h))


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        u = self.eigenvectors
        return (u * self.eigenvalues) @ u.conj().T


def eigen_decompose(h) -> SpectralDecomposition:
    """Eigenvalues in ascending order with unitary eigenvector columns."""
    h = as_hermitian(h)
    w, u = np.linalg.eigh(h.entries)
    w.setflags(write=False)
    u.setflags(write=False)
    return SpectralDecomposition(w, u)


def apply_function(f: Callable, h) -> HermitianMatrix:
    """Functional calculus ``f(h)``.

    ``f`` is any vectorised real function; if it carries a ``domain``
    interval, every eigenvalue of ``h`` must lie in it.
    """
    dec = eigen_decompose(h)
    domain = getattr(f, "domain", None)
    if domain is not None:
        bad = ~domain.contains(dec.eigenvalues)
        if np.any(bad):
            lam = dec.eigenvalues[np.argmax(bad)]
            raise DomainError(f"eigenvalue {lam!r} lies outside the domain {domain}")
    vals = np.asarray(f(dec.eigenvalues), dtype=float)
    vals = np.broadcast_to(vals, dec.eigenvalues.shape)
    if not np.all(np.isfinite(vals)):
        raise DomainError("function is not finite on the spectrum")
    u = dec.eigenvectors
    return HermitianMatrix((u * vals) @ u.conj().T)


def min_eigenvalue(h) -> float:
    return float(np.linalg.eigvalsh(np.asarray(h))[0])


def loewner_leq(x, y, tol: float = DEFAULT_TOL) -> bool:
    """``x <= y`` in the Loewner order: ``y - x`` is positive semidefinite up to ``tol``."""
    x, y = as_hermitian(x), as_hermitian(y)
    if x.dim != y.dim:
        raise ValueError(f"dimension mismatch: {x.dim} vs {y.dim}")
    if tol < 0:
        raise ValueError("tol must be non-negative")
    d = y.entries - x.entries
    return min_eigenvalue(d) >= -tol * max(1.0, _max_abs(d))


def random_unitary(n: int, rng: np.random.Generator, complex_entries: bool = True) -> np.ndarray:
    z = rng.standard_normal((n, n))
    if complex_entries:
        z = z + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_hermitian(n: int, rng: np.random.Generator, complex_entries: bool = True) -> np.ndarray:
    a = rng.standard_normal((n, n))
    if complex_entries:
        a = a + 1j * rng.standard_normal((n, n))
    return (a + a.conj().T) / 2


def _log_uniform(rng, lo, hi):
    return math.exp(rng.uniform(math.log(lo), math.log(hi)))


def sample_ordered_pair(
    interval: Interval,
    n: int,
    seed: int,
    complex_entries: bool = True,
    max_attempts: int = 50,
    rank: int | None = None,
) -> tuple[HermitianMatrix, HermitianMatrix]:
    """Random ``x <= y`` with both spectra strictly inside ``interval``.

    ``y = x + b`` where ``b`` is a PSD bump of rank ``<= n`` with spectral norm
    drawn log-uniformly in ``[1e-3, length/4]``. A ``1e-6`` relative floor is
    added to ``b`` so that the order survives the rounding in ``x + b``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    lo, hi = interval.window()
    length = hi - lo
    norm_lo = min(1e-3, length * 1e-4)
    for _ in range(max_attempts):
        norm = _log_uniform(rng, norm_lo, length / 4)
        evals = rng.uniform(lo, hi - norm, size=n)
        u = random_unitary(n, rng, complex_entries)
        x = (u * evals) @ u.conj().T
        r = rank if rank is not None else int(rng.integers(1, n + 1))
        p = rng.standard_normal((n, r))
        if complex_entries:
            p = p + 1j * rng.standard_normal((n, r))
        b = p @ p.conj().T
        b *= (1 - 1e-6) * norm / np.linalg.norm(b, 2)
        b += 1e-6 * norm * np.eye(n)
        y = x + b
        xh, yh = HermitianMatrix(x), HermitianMatrix(y)
        wx = np.linalg.eigvalsh(xh.entries)
        wy = np.linalg.eigvalsh(yh.entries)
        if np.all(interval.contains(wx)) and np.all(interval.contains(wy)) and wx[0] > lo and wy[-1] < hi:
            return xh, yh
    raise SamplingError(f"could not fit an ordered pair into {interval} after {max_attempts} attempts")
