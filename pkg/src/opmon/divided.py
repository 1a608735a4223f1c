"""First and second divided differences, Loewner matrices and Kraus matrices.

All kernels are vectorised: the ``*_batch`` helpers build the matrices for
a whole stack of grids at once, which is what the randomised criteria use.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, EvaluationError
from .functions import ScalarFunction

#: relative gap below which a first difference switches to f' at the midpoint
CONFLUENCE = 1e-7
#: relative spread below which divided differences are computed by quadrature
#: of the derivative (Hermite-Genocchi) instead of by subtraction
CLUSTER = 1e-2
#: rounding-to-difference ratio above which a far quotient is replaced by
#: composite quadrature of f'
CANCELLATION = 1e-13

_EPS = np.finfo(float).eps

_GL_X, _GL_W = np.polynomial.legendre.leggauss(10)
_GL_X = (_GL_X + 1) / 2
_GL_W = _GL_W / 2
# collapsed tensor rule on the 2-simplex {tau1, tau2 >= 0, tau1 + tau2 <= 1}
_U, _V = np.meshgrid(_GL_X, _GL_X, indexing="ij")
_SIMPLEX_T1 = _U.ravel()
_SIMPLEX_T2 = ((1 - _U) * _V).ravel()
_SIMPLEX_W = (np.outer(_GL_W, _GL_W) * (1 - _U)).ravel()


@dataclass(frozen=True, eq=False)
class Grid:
    nodes: np.ndarray

    def __post_init__(self):
        a = np.array(self.nodes, dtype=float).ravel()
        if a.size == 0 or not np.all(np.isfinite(a)):
            raise ValueError("grid needs at least one finite node")
        a.setflags(write=False)
        object.__setattr__(self, "nodes", a)

    def __len__(self):
        return self.nodes.size

    def check_in(self, f: ScalarFunction):
        bad = ~f.domain.contains(self.nodes)
        if np.any(bad):
            raise DomainError(f"grid node {self.nodes[np.argmax(bad)]!r} outside {f.domain}")

    def to_json(self) -> list:
        return self.nodes.tolist()


def _as_grid(grid) -> Grid:
    return grid if isinstance(grid, Grid) else Grid(grid)


def _finite(x, what):
    if not np.all(np.isfinite(x)):
        raise EvaluationError(f"non-finite {what}")
    return x


def _dd1(f: ScalarFunction, t, s):
    t, s = np.broadcast_arrays(np.asarray(t, float), np.asarray(s, float))
    # canonical order keeps [t, s] and [s, t] bitwise equal
    lo, hi = np.minimum(t, s), np.maximum(t, s)
    gap = hi - lo
    big = np.maximum(np.abs(lo), np.abs(hi))
    confluent = gap <= CONFLUENCE * np.maximum(1.0, big)
    close = ~confluent & (gap <= CLUSTER * big)
    far = ~(confluent | close)
    out = np.empty(t.shape)
    if np.any(far):
        idx = np.flatnonzero(far.ravel())
        a, b = lo.ravel()[idx], hi.ravel()[idx]
        fa, fb = np.asarray(f(a)), np.asarray(f(b))
        diff = fb - fa
        q = diff / (b - a)
        # when f(t) - f(s) cancels most digits, integrate f' instead
        with np.errstate(divide="ignore", invalid="ignore"):
            lost = _EPS * (np.abs(fa) + np.abs(fb)) > CANCELLATION * np.abs(diff)
        if np.any(lost):
            q[lost] = _dd1_composite(f, a[lost], b[lost])
        out.ravel()[idx] = q
    if np.any(close):
        out[close] = _dd1_quadrature(f, lo[close], hi[close])
    if np.any(confluent):
        out[confluent] = f.deriv((lo[confluent] + hi[confluent]) / 2)
    return _finite(out, f"first divided difference of {f.name}")


def _dd1_quadrature(f: ScalarFunction, a, b):
    x = a[..., None] + _GL_X * (b - a)[..., None]
    return np.asarray(f.deriv(x)) @ _GL_W


def _dd1_composite(f: ScalarFunction, a, b, panels: int = 16):
    """Mean of f' over [a, b] by Gauss-Legendre on ``panels`` sub-intervals.

    Sub-intervals are geometric when ``[a, b]`` spans a wide positive (or
    negative) range, where derivatives of Loewner-type functions vary by
    orders of magnitude, and uniform otherwise.
    """
    u = np.linspace(0.0, 1.0, panels + 1)
    edges = a[:, None] + u * (b - a)[:, None]
    geo = (a > 0) & (b > 4 * a)
    if np.any(geo):
        edges[geo] = a[geo, None] * (b[geo] / a[geo])[:, None] ** u
    neg = (b < 0) & (a < 4 * b)
    if np.any(neg):
        edges[neg] = b[neg, None] * (a[neg] / b[neg])[:, None] ** u[::-1]
    left, width = edges[:, :-1], np.diff(edges, axis=1)
    x = left[..., None] + _GL_X * width[..., None]
    vals = np.asarray(f.deriv(x)) @ _GL_W
    return np.sum(vals * width, axis=1) / (b - a)


def _dd2(f: ScalarFunction, t, s, r):
    t, s, r = np.broadcast_arrays(np.asarray(t, float), np.asarray(s, float), np.asarray(r, float))
    srt = np.sort(np.stack([t, s, r]), axis=0)
    a, b, c = srt[0], srt[1], srt[2]
    spread = c - a
    clustered = spread <= CLUSTER * np.maximum(np.abs(a), np.abs(c))
    out = np.empty(a.shape)
    if np.any(clustered):
        ac, bc, cc = a[clustered], b[clustered], c[clustered]
        x = ac[..., None] + _SIMPLEX_T1 * (bc - ac)[..., None] + _SIMPLEX_T2 * (cc - ac)[..., None]
        out[clustered] = np.asarray(f.deriv2(x)) @ _SIMPLEX_W
    far = ~clustered
    if np.any(far):
        af, bf, cf = a[far], b[far], c[far]
        out[far] = (_dd1(f, af, bf) - _dd1(f, bf, cf)) / (af - cf)
    return _finite(out, f"second divided difference of {f.name}")


def divdiff1(f: ScalarFunction, t, s):
    """``[t, s]_f``.

    ``f'`` at the midpoint when ``|t - s|`` is below the confluence gap,
    Gauss-Legendre quadrature of ``f'`` over ``[s, t]`` for close nodes, and
    the plain difference quotient otherwise.
    """
    out = _dd1(f, t, s)
    return float(out) if out.ndim == 0 else out


def divdiff2(f: ScalarFunction, t, s, r):
    """``[t, s, r]_f``, symmetric in its arguments, with ``[t, t, t]_f = f''(t)/2``."""
    out = _dd2(f, t, s, r)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class LoewnerMatrix:
    entries: np.ndarray = field(repr=False)
    grid: Grid

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.entries)[0])

    def to_json(self) -> dict:
        return {"dim": len(self.grid), "re": self.entries.tolist(), "grid": self.grid.to_json()}


@dataclass(frozen=True, eq=False)
class KrausMatrixSet:
    matrices: np.ndarray = field(repr=False)  # shape (n, n, n); matrices[p] = H(p+1)
    grid: Grid

    def __len__(self):
        return self.matrices.shape[0]

    def __getitem__(self, p):
        return self.matrices[p]

    def min_eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrices)[:, 0]

    def to_json(self) -> dict:
        n = len(self.grid)
        return {
            "grid": self.grid.to_json(),
            "matrices": [{"dim": n, "re": m.tolist()} for m in self.matrices],
        }


def loewner_batch(f: ScalarFunction, grids) -> np.ndarray:
    """Loewner matrices for a stack of grids of shape ``(..., n)``."""
    g = np.asarray(grids, dtype=float)
    m = _dd1(f, g[..., :, None], g[..., None, :])
    return (m + np.swapaxes(m, -1, -2)) / 2


def kraus_batch(f: ScalarFunction, grids) -> np.ndarray:
    """Kraus matrices ``H(p)[i, j] = 2 [l_p, l_i, l_j]_f``; shape ``(..., n, n, n)``."""
    g = np.asarray(grids, dtype=float)
    m = 2 * _dd2(f, g[..., :, None, None], g[..., None, :, None], g[..., None, None, :])
    return (m + np.swapaxes(m, -1, -2)) / 2


def loewner_matrix(f: ScalarFunction, grid) -> LoewnerMatrix:
    grid = _as_grid(grid)
    grid.check_in(f)
    return LoewnerMatrix(loewner_batch(f, grid.nodes), grid)


def kraus_matrices(f: ScalarFunction, grid) -> KrausMatrixSet:
    grid = _as_grid(grid)
    grid.check_in(f)
    return KrausMatrixSet(kraus_batch(f, grid.nodes), grid)


def _quad_form(m, xi):
    return np.vdot(xi, m @ xi)


def derivative_lemma(f: ScalarFunction, grid, h, xi, order: int = 1, step: float | None = None) -> dict:
    """Compare finite differences of ``t -> (f(x + t h) xi | xi)`` at 0 with the divided-difference formulas.

    ``x = diag(grid)``.  The first derivative should equal ``(h o L xi | xi)``
    (Hadamard product with the Loewner matrix), the second
    ``sum_p (H(p) eta(p) | eta(p))`` with ``eta(p)_i = xi_i h[p, i]``.
    ``rel_error`` is measured against the sum of the absolute values of the
    terms in the formula, so cancellation does not inflate it.
    """
    from .hermitian import apply_function

    grid = _as_grid(grid)
    grid.check_in(f)
    lam = grid.nodes
    h = np.asarray(h)
    xi = np.asarray(xi)
    x = np.diag(lam).astype(h.dtype)
    if step is None:
        step = 1e-5 if order == 1 else 1e-4

    def q(t):
        return _quad_form(apply_function(f, x + t * h).entries, xi).real

    if order == 1:
        fd = (q(step) - q(-step)) / (2 * step)
        terms = np.conj(xi)[:, None] * (h * loewner_batch(f, lam)) * xi[None, :]
    elif order == 2:
        fd = (q(step) - 2 * q(0.0) + q(-step)) / step**2
        hk = kraus_batch(f, lam)  # (p, i, j)
        eta = xi[None, :] * h  # eta[p, i] = xi_i h[p, i]
        terms = np.conj(eta)[:, :, None] * hk * eta[:, None, :]
    else:
        raise ValueError("order must be 1 or 2")
    formula = float(np.sum(terms).real)
    scale = float(np.sum(np.abs(terms)))
    return {
        "finite_difference": float(fd),
        "formula": formula,
        "rel_error": abs(fd - formula) / scale if scale > 0 else abs(fd - formula),
    }
