"""Planar fast-slow systems and the geometry of their critical manifold.

The system is

    dx/dt = f(x) + I - z + u
    dz/dt = eps * g(x, z)

with ``f`` a polynomial of degree at most five and ``g`` affine in ``(x, z)``.
``I`` is the constant baseline current; ``u`` is the exogenous input and
enters the fast equation only.

The critical manifold ``z = f(x) + I + u`` is S-shaped: two attracting outer
branches (``Branch.LOWER``, ``Branch.UPPER``) joined to a repelling middle
branch (``Branch.REPELLING``) at the lower and upper folds.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np

from .errors import BranchOutOfDomain, OnSeparatrix, ShapeError

__all__ = [
    "Branch",
    "FastSlowSystem",
    "ManifoldGeometry",
    "fitzhugh_nagumo",
    "eval_fast",
    "eval_slow",
    "fold_points",
    "branch_solve",
    "basin_of",
]

ROOT_TOL = 1e-12
SEPARATRIX_TOL = 1e-9
X_MAX = 10.0


class Branch(enum.Enum):
    LOWER = "lower"
    REPELLING = "repelling"
    UPPER = "upper"

    @property
    def opposite(self) -> "Branch":
        if self is Branch.LOWER:
            return Branch.UPPER
        if self is Branch.UPPER:
            return Branch.LOWER
        raise ValueError("the repelling branch has no opposite")


@dataclass(frozen=True)
class FastSlowSystem:
    """Coefficient description of a planar relaxation oscillator.

    Parameters
    ----------
    f_coeffs : tuple of float
        Ascending polynomial coefficients of ``f``, i.e. ``f(x) = sum c[k] x**k``.
        At most six entries.
    g_coeffs : tuple of float
        ``(g0, gx, gz)`` with ``g(x, z) = g0 + gx * x + gz * z``.
    baseline : float
        Constant current ``I`` added to the fast equation.
    epsilon : float
        Time-scale separation; ``0`` denotes the singular limit.
    params : mapping
        Named parameters kept for reporting (``a``, ``b`` for FitzHugh-Nagumo).
    """

    f_coeffs: tuple[float, ...]
    g_coeffs: tuple[float, float, float]
    baseline: float = 0.0
    epsilon: float = 0.0
    params: Mapping[str, float] = field(default_factory=dict, compare=False)
    _df_coeffs: tuple[float, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        fc = tuple(float(c) for c in self.f_coeffs)
        if not 1 <= len(fc) <= 6:
            raise ValueError("f must be a polynomial of degree at most 5")
        gc = tuple(float(c) for c in self.g_coeffs)
        if len(gc) != 3:
            raise ValueError("g_coeffs must be (g0, gx, gz)")
        if not (self.epsilon >= 0 and math.isfinite(self.epsilon)):
            raise ValueError(f"epsilon must be finite and >= 0, got {self.epsilon}")
        object.__setattr__(self, "f_coeffs", fc)
        object.__setattr__(self, "g_coeffs", gc)
        object.__setattr__(self, "params", dict(self.params))
        object.__setattr__(self, "_df_coeffs",
                           tuple(k * c for k, c in enumerate(fc))[1:] or (0.0,))

    def with_epsilon(self, epsilon: float) -> "FastSlowSystem":
        return replace(self, epsilon=float(epsilon))

    def f(self, x):
        return _horner(self.f_coeffs, x)

    def df(self, x):
        return _horner(self._df_coeffs, x)

    def g(self, x, z):
        g0, gx, gz = self.g_coeffs
        return g0 + gx * x + gz * z

    def nullcline(self, x, u_bar: float = 0.0):
        """Height ``z`` of the (shifted) critical manifold above ``x``."""
        return self.f(x) + self.baseline + u_bar

    def vector_field(self, x, z, u: float = 0.0):
        """Right-hand side in the fast time scale."""
        return (eval_fast(self, x, z, u), self.epsilon * self.g(x, z))

    def jacobian(self, x, z):
        _, gx, gz = self.g_coeffs
        eps = self.epsilon
        return np.array([[self.df(x), -1.0], [eps * gx, eps * gz]])


def _horner(coeffs, x):
    acc = coeffs[-1]
    for c in coeffs[-2::-1]:
        acc = acc * x + c
    return acc


def fitzhugh_nagumo(a: float = 0.7, b: float = 0.8, current: float = 1.0,
                    epsilon: float = 0.0) -> FastSlowSystem:
    """FitzHugh-Nagumo with ``f(v) = v - v**3/3`` and ``g(v, w) = v + a - b w``."""
    return FastSlowSystem(
        f_coeffs=(0.0, 1.0, 0.0, -1.0 / 3.0),
        g_coeffs=(a, 1.0, -b),
        baseline=current,
        epsilon=epsilon,
        params={"a": a, "b": b, "I": current},
    )


def eval_fast(sys: FastSlowSystem, x, z, u=0.0):
    """Fast-time derivative of ``x``: ``f(x) + I - z + u``."""
    return sys.f(x) + sys.baseline - z + u


def eval_slow(sys: FastSlowSystem, x, z):
    """Slow-time derivative of ``z``: ``g(x, z)``."""
    return sys.g(x, z)


@dataclass(frozen=True)
class ManifoldGeometry:
    """Folds and branch domains of the unshifted critical manifold.

    ``lower_fold`` is the local minimum of ``f + I`` and ``upper_fold`` the
    local maximum. Under a constant input ``u_bar`` every z-value below is
    shifted by ``u_bar``.
    """

    system: FastSlowSystem
    lower_fold: tuple[float, float]
    upper_fold: tuple[float, float]
    x_max: float = X_MAX
    separatrix_tol: float = SEPARATRIX_TOL

    @property
    def z_minus(self) -> float:
        return self.lower_fold[1]

    @property
    def z_plus(self) -> float:
        return self.upper_fold[1]

    def branch_domain(self, branch: Branch, u_bar: float = 0.0) -> tuple[float, float]:
        """Closed z-interval on which ``branch`` exists under input ``u_bar``."""
        sys = self.system
        if branch is Branch.UPPER:
            lo, hi = float(sys.nullcline(self.x_max)), self.z_plus
        elif branch is Branch.LOWER:
            lo, hi = self.z_minus, float(sys.nullcline(-self.x_max))
        else:
            lo, hi = self.z_minus, self.z_plus
        return lo + u_bar, hi + u_bar

    def x_bracket(self, branch: Branch) -> tuple[float, float]:
        if branch is Branch.UPPER:
            return self.upper_fold[0], self.x_max
        if branch is Branch.LOWER:
            return -self.x_max, self.lower_fold[0]
        return self.lower_fold[0], self.upper_fold[0]


def fold_points(sys: FastSlowSystem, x_max: float = X_MAX,
                separatrix_tol: float = SEPARATRIX_TOL) -> ManifoldGeometry:
    """Locate both folds of the critical manifold.

    Raises
    ------
    ShapeError
        If ``f'`` does not have exactly two simple real roots in
        ``[-x_max, x_max]``, or if the outer branches are not attracting.
    """
    P = np.polynomial.Polynomial(sys.f_coeffs).trim()
    dP = P.deriv()
    if dP.degree() < 2:
        raise ShapeError("f' has fewer than two roots; the critical manifold is not S-shaped")
    roots = dP.roots()
    real = np.sort(roots[np.abs(roots.imag) <= 1e-10 * (1 + np.abs(roots.real))].real)
    real = real[np.abs(real) <= x_max]
    if len(real) != 2 or np.isclose(real[0], real[1], rtol=0, atol=1e-9):
        raise ShapeError(f"f' must have exactly two simple roots in [-{x_max}, {x_max}], "
                         f"found {len(real)}")
    x_lo, x_hi = float(real[0]), float(real[1])
    d2 = P.deriv(2)
    if not (d2(x_lo) > 0 > d2(x_hi)):
        raise ShapeError("outer branches of the critical manifold are not attracting "
                         "(need a local minimum of f left of a local maximum)")
    z_lo = float(sys.nullcline(x_lo))
    z_hi = float(sys.nullcline(x_hi))
    return ManifoldGeometry(sys, (x_lo, z_lo), (x_hi, z_hi), x_max, separatrix_tol)


def branch_solve(geom: ManifoldGeometry, z: float, branch: Branch,
                 u_bar: float = 0.0, tol: float = ROOT_TOL) -> float:
    """Solve ``f(x) + I + u_bar = z`` for ``x`` on the requested branch.

    Newton's method safeguarded by bisection on the bracket spanned by the
    critical points of ``f`` (and ``+-x_max`` for the outer branches). On each
    bracket the residual is monotone, so the root is unique.
    """
    lo_z, hi_z = geom.branch_domain(branch, u_bar)
    if not lo_z <= z <= hi_z:
        raise BranchOutOfDomain(
            f"z={z!r} outside the {branch.value} branch domain [{lo_z}, {hi_z}] (u_bar={u_bar})"
        )
    sys = geom.system
    target = z - u_bar - sys.baseline
    a, b = geom.x_bracket(branch)

    def h(x):
        return float(sys.f(x)) - target

    ha, hb = h(a), h(b)
    if ha == 0.0:
        return a
    if hb == 0.0:
        return b
    if ha * hb > 0:
        # z sits on the domain edge up to rounding
        return a if abs(ha) < abs(hb) else b
    rising = hb > 0
    x = 0.5 * (a + b)
    for _ in range(200):
        hx = h(x)
        if (hx > 0) == rising:
            b = x
        else:
            a = x
        dh = float(sys.df(x))
        step_ok = False
        if dh != 0.0:
            xn = x - hx / dh
            if a < xn < b:
                step_ok = True
        if not step_ok:
            xn = 0.5 * (a + b)
        if abs(hx) <= tol and abs(xn - x) <= 4e-16 * (1.0 + abs(x)):
            return x
        if b - a <= 4e-16 * (1.0 + abs(x)):
            return xn
        x = xn
    return x


def basin_of(geom: ManifoldGeometry, x: float, z: float, u_bar: float = 0.0) -> Branch:
    """Attracting branch of the (shifted) manifold reached by the layer flow from ``(x, z)``.

    Raises
    ------
    OnSeparatrix
        If ``x`` is within ``geom.separatrix_tol`` of the repelling branch.
    """
    z_lo = geom.z_minus + u_bar
    z_hi = geom.z_plus + u_bar
    # the fold fibers belong to the branch the fold jumps to
    if z <= z_lo:
        return Branch.UPPER
    if z >= z_hi:
        return Branch.LOWER
    xr = branch_solve(geom, z, Branch.REPELLING, u_bar)
    if abs(x - xr) <= geom.separatrix_tol:
        raise OnSeparatrix(f"({x}, {z}) lies on the repelling branch x={xr}")
    return Branch.UPPER if x > xr else Branch.LOWER
