"""Singular-limit phase map and finite phase response curves.

In the limit ``eps -> 0`` trajectories jump instantly along vertical fibers
and slide along the attracting branches of the critical manifold. Phase is
slow time elapsed since the lower fold, normalized by the singular period,
so isochrons are vertical rays (inside the bistable band) or vertical lines
(outside it).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.optimize import brentq

from .errors import BranchOutOfDomain, NoCrossing, SlowFieldVanishes
from .model import Branch, ManifoldGeometry, basin_of, branch_solve

__all__ = [
    "TWO_PI",
    "wrap_phase",
    "wrap_shift",
    "Impulse",
    "SquarePulse",
    "InputSignal",
    "PrcCurve",
    "SingularOrbit",
    "PulseEndpoint",
    "psi",
    "build_orbit",
    "orbit_point",
    "phase_of",
    "critical_z",
    "prc_impulse",
    "prc_impulse_reset",
    "pulse_endpoint",
    "prc_pulse",
    "prc_singular",
]

TWO_PI = 2.0 * math.pi
QUAD_ABS_TOL = 1e-11
SLOW_FIELD_TOL = 1e-12


def wrap_phase(theta):
    """Reduce to ``[0, 2*pi)``."""
    w = np.mod(theta, TWO_PI)
    # np.mod can round up to exactly 2*pi for tiny negative inputs
    w = np.where(w >= TWO_PI, 0.0, w)
    return float(w) if np.ndim(w) == 0 else w


def wrap_shift(delta):
    """Reduce to ``[-pi, pi)``."""
    w = np.mod(np.asarray(delta, dtype=float) + math.pi, TWO_PI)
    w = np.where(w >= TWO_PI, 0.0, w) - math.pi
    return float(w) if np.ndim(w) == 0 else w


@dataclass(frozen=True)
class Impulse:
    """Dirac input ``alpha * delta(t)``: an instantaneous jump of ``x`` by ``alpha``."""

    alpha: float

    def describe(self) -> str:
        return f"impulse(alpha={self.alpha:g})"


@dataclass(frozen=True)
class SquarePulse:
    """Constant input ``u_bar`` held for a finite duration.

    The duration is given either in slow time (``duration_slow``) or as a
    fraction of the oscillation period (``period_fraction``); exactly one
    must be set. A period fraction is resolved against whichever period is
    in use: the singular slow period for singular predictions, the fast
    period of the limit cycle for simulations.
    """

    u_bar: float
    duration_slow: float | None = None
    period_fraction: float | None = None

    def __post_init__(self):
        if (self.duration_slow is None) == (self.period_fraction is None):
            raise ValueError("give exactly one of duration_slow and period_fraction")
        d = self.duration_slow if self.duration_slow is not None else self.period_fraction
        if not d >= 0:
            raise ValueError(f"pulse duration must be >= 0, got {d}")

    def slow_duration(self, period_slow: float) -> float:
        if self.duration_slow is not None:
            return float(self.duration_slow)
        return float(self.period_fraction) * period_slow

    def fast_duration(self, epsilon: float, period_fast: float) -> float:
        if self.duration_slow is not None:
            return float(self.duration_slow) / epsilon
        return float(self.period_fraction) * period_fast

    def describe(self) -> str:
        if self.duration_slow is not None:
            return f"pulse(u_bar={self.u_bar:g}, duration_slow={self.duration_slow:g})"
        return f"pulse(u_bar={self.u_bar:g}, duration={self.period_fraction:g} period)"


InputSignal = Union[Impulse, SquarePulse, None]


@dataclass
class PrcCurve:
    """Sampled phase response curve.

    ``shift`` is wrapped to ``[-pi, pi)``; positive values are advances.
    """

    theta: np.ndarray
    shift: np.ndarray
    method: str
    input: InputSignal
    epsilon: float

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float)
        self.shift = wrap_shift(np.asarray(self.shift, dtype=float)) if len(self.theta) else \
            np.zeros(0)
        self.shift = np.atleast_1d(self.shift)
        if self.theta.shape != self.shift.shape:
            raise ValueError("theta and shift must have the same length")
        if np.any(np.diff(self.theta) <= 0):
            raise ValueError("theta must be strictly increasing")

    def __len__(self):
        return len(self.theta)

    def unwrapped(self) -> np.ndarray:
        """Shifts made continuous by adding multiples of ``2*pi``; for plotting."""
        if len(self.shift) == 0:
            return self.shift.copy()
        return np.unwrap(self.shift)


@dataclass(frozen=True)
class SingularOrbit:
    """Singular periodic orbit parameterized by phase.

    Phase 0 is the lower fold (and its jump fiber); ``theta_plus`` is the
    upper fold. ``period_slow`` is the time to slide up the upper branch
    (``dtau_plus``) plus the time to slide down the lower one (``dtau_minus``).
    """

    geom: ManifoldGeometry
    dtau_plus: float
    dtau_minus: float
    theta_minus: float = 0.0
    fold_offset: float = 0.0

    @property
    def period_slow(self) -> float:
        return self.dtau_plus + self.dtau_minus

    @property
    def omega_slow(self) -> float:
        return TWO_PI / self.period_slow

    @property
    def theta_plus(self) -> float:
        return self.omega_slow * self.dtau_plus


# ---------------------------------------------------------------------------
# travel times on the attracting branches


def _slow_speed(geom: ManifoldGeometry, branch: Branch, xi: float, u_bar: float) -> float:
    x = branch_solve(geom, xi, branch, u_bar)
    return float(geom.system.g(x, xi))


def _check_domain(geom, branch, z0, z1, u_bar):
    lo, hi = geom.branch_domain(branch, u_bar)
    for z in (z0, z1):
        if not lo <= z <= hi:
            raise BranchOutOfDomain(
                f"z={z!r} outside the {branch.value} branch domain [{lo}, {hi}] (u_bar={u_bar})"
            )


def _check_no_equilibrium(geom, branch, z0, z1, u_bar, n=65):
    zs = np.linspace(min(z0, z1), max(z0, z1), n)
    gs = np.array([_slow_speed(geom, branch, z, u_bar) for z in zs])
    if np.any(np.abs(gs) < SLOW_FIELD_TOL) or (gs.min() < 0 < gs.max()):
        raise SlowFieldVanishes(
            f"slow field vanishes on the {branch.value} branch between z={z0} and z={z1} "
            f"(u_bar={u_bar})"
        )


def psi(geom: ManifoldGeometry, branch: Branch, z0: float, z1: float,
        u_bar: float = 0.0, *, check: bool = True) -> float:
    """Signed slow time to slide from ``z0`` to ``z1`` along a stable branch.

    Integrates ``1 / g(b(xi - u_bar), xi)`` from ``z0`` to ``z1``. The result
    is positive iff the reduced flow carries ``z0`` to ``z1``. Swapping the
    endpoints flips the sign exactly.

    Raises
    ------
    BranchOutOfDomain
        If either endpoint is outside the shifted branch domain.
    SlowFieldVanishes
        If ``g`` vanishes (or changes sign) on the arc.
    """
    if branch is Branch.REPELLING:
        raise ValueError("travel times are defined on the attracting branches only")
    _check_domain(geom, branch, z0, z1, u_bar)
    if z0 == z1:
        return 0.0
    lo, hi = (z0, z1) if z0 < z1 else (z1, z0)
    if check:
        _check_no_equilibrium(geom, branch, lo, hi, u_bar)
    val, _ = quad(lambda xi: 1.0 / _slow_speed(geom, branch, xi, u_bar), lo, hi,
                  epsabs=QUAD_ABS_TOL, epsrel=1e-13, limit=200)
    return val if z0 < z1 else -val


def build_orbit(geom: ManifoldGeometry, fold_offset: float = 0.0) -> SingularOrbit:
    """Assemble the singular periodic orbit from the two slow arcs.

    ``fold_offset`` trims the arcs near the folds for models whose slow
    field degenerates there; the default 0 integrates right up to the folds.
    """
    zm, zp = geom.z_minus, geom.z_plus
    dtau_plus = psi(geom, Branch.UPPER, zm + fold_offset, zp - fold_offset)
    dtau_minus = psi(geom, Branch.LOWER, zp - fold_offset, zm + fold_offset)
    if not (dtau_plus > 0 and dtau_minus > 0):
        raise SlowFieldVanishes(
            "reduced flow does not carry the upper branch up and the lower branch down; "
            "no relaxation oscillation"
        )
    return SingularOrbit(geom, dtau_plus, dtau_minus, fold_offset=fold_offset)


def _solve_travel(geom, branch, z_start, z_end, u_bar, budget, tol=1e-13):
    """Find ``z`` between ``z_start`` and ``z_end`` with ``psi(z_start, z) == budget``.

    ``psi`` is monotone along the flow, with derivative ``1 / g``, so Newton's
    method is safeguarded by bisection on the travel-time bracket.
    """
    lo, hi = z_start, z_end
    if budget <= 0.0:
        return z_start
    # initial guess from linear interpolation of the full arc
    z = z_start + 0.5 * (z_end - z_start)
    for _ in range(100):
        t = psi(geom, branch, z_start, z, u_bar, check=False)
        r = t - budget
        if r > 0:
            hi = z
        else:
            lo = z
        dz = -r * _slow_speed(geom, branch, z, u_bar)
        zn = z + dz
        if not (min(lo, hi) < zn < max(lo, hi)):
            zn = 0.5 * (lo + hi)
        if abs(r) <= tol or abs(zn - z) <= 1e-15 * (1.0 + abs(z)):
            return zn if abs(r) > tol else z
        z = zn
    return z


def orbit_point(orbit: SingularOrbit, theta: float) -> tuple[float, float, Branch]:
    """Point of the singular orbit with phase ``theta``.

    ``[0, theta_plus)`` maps onto the upper branch starting at the landing
    point of the lower-fold jump; ``[theta_plus, 2*pi)`` onto the lower branch
    starting at the landing point of the upper-fold jump.
    """
    geom = orbit.geom
    theta = wrap_phase(theta)
    w = orbit.omega_slow
    zm = geom.z_minus + orbit.fold_offset
    zp = geom.z_plus - orbit.fold_offset
    if theta < orbit.theta_plus:
        z = _solve_travel(geom, Branch.UPPER, zm, zp, 0.0, theta / w)
        branch = Branch.UPPER
    else:
        z = _solve_travel(geom, Branch.LOWER, zp, zm, 0.0, (theta - orbit.theta_plus) / w)
        branch = Branch.LOWER
    return branch_solve(geom, z, branch), z, branch


def phase_of(orbit: SingularOrbit, x: float, z: float) -> float:
    """Singular asymptotic phase of ``(x, z)``.

    The layer flow carries the point to the attracting branch picked by
    ``basin_of`` at the same ``z``; its phase is the slow travel time from
    the fold that feeds that branch. Raises ``OnSeparatrix`` on the
    repelling branch.
    """
    geom = orbit.geom
    w = orbit.omega_slow
    if basin_of(geom, x, z) is Branch.UPPER:
        return wrap_phase(orbit.theta_minus + w * psi(geom, Branch.UPPER, geom.z_minus, z))
    return wrap_phase(orbit.theta_plus + w * psi(geom, Branch.LOWER, geom.z_plus, z))


# ---------------------------------------------------------------------------
# impulses


def critical_z(orbit: SingularOrbit, alpha: float, sign: int = 1) -> tuple[float, float]:
    """Threshold on the slow variable beyond which a kick crosses the separatrix.

    ``sign=+1``: a kick of ``+alpha`` from the lower branch crosses the
    repelling branch for ``z_minus <= z < z_c``. ``sign=-1``: a kick of
    ``-alpha`` from the upper branch crosses for ``z_c < z <= z_plus``.
    Returns ``(z_c, theta_c)`` where ``theta_c`` is the phase of the orbit
    point at ``z_c``. If the kick crosses along the whole branch, ``z_c`` is
    the far fold.

    Raises
    ------
    NoCrossing
        If ``alpha <= 0``.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    if not alpha > 0:
        raise NoCrossing(f"an impulse of size {alpha} never crosses the separatrix")
    geom = orbit.geom
    zm, zp = geom.z_minus, geom.z_plus
    w = orbit.omega_slow
    if sign > 0:
        def gap(z):
            return branch_solve(geom, z, Branch.LOWER) + alpha - branch_solve(geom, z, Branch.REPELLING)
        if gap(zp) >= 0:
            return zp, orbit.theta_plus
        z_c = brentq(gap, zm, zp, xtol=1e-15, rtol=1e-15, maxiter=200)
        return z_c, wrap_phase(orbit.theta_plus + w * psi(geom, Branch.LOWER, zp, z_c))

    def gap(z):
        return branch_solve(geom, z, Branch.UPPER) - alpha - branch_solve(geom, z, Branch.REPELLING)
    if gap(zm) <= 0:
        return zm, orbit.theta_minus
    z_c = brentq(gap, zm, zp, xtol=1e-15, rtol=1e-15, maxiter=200)
    return z_c, wrap_phase(orbit.theta_minus + w * psi(geom, Branch.UPPER, zm, z_c))


def prc_impulse(orbit: SingularOrbit, alpha: float, theta: float) -> float:
    """Singular phase shift produced by a kick ``x -> x + alpha`` at phase ``theta``.

    Piecewise closed form: a positive kick advances the phase only on the
    stretch of lower branch between ``theta_c`` and the lower fold, where
    the state lands on the upper branch; a negative kick acts symmetrically
    between ``theta_c`` and the upper fold. The boundary ``theta == theta_c``
    produces no shift.
    """
    if alpha == 0:
        return 0.0
    theta = wrap_phase(theta)
    geom = orbit.geom
    w = orbit.omega_slow
    sign = 1 if alpha > 0 else -1
    _, theta_c = critical_z(orbit, abs(alpha), sign)
    if sign > 0:
        # (theta_c, theta_minus] read modulo 2*pi
        if not theta > theta_c:
            return 0.0
        _, z, _ = orbit_point(orbit, theta)
        return wrap_shift(orbit.theta_minus + w * psi(geom, Branch.UPPER, geom.z_minus, z) - theta)
    if not (theta_c < theta <= orbit.theta_plus):
        return 0.0
    _, z, _ = orbit_point(orbit, theta)
    return wrap_shift(orbit.theta_plus + w * psi(geom, Branch.LOWER, geom.z_plus, z) - theta)


def prc_impulse_reset(orbit: SingularOrbit, alpha: float, theta: float) -> float:
    """Same shift as `prc_impulse`, computed by kicking the orbit point and
    reading off its singular phase."""
    x, z, _ = orbit_point(orbit, theta)
    return wrap_shift(phase_of(orbit, x + alpha, z) - wrap_phase(theta))


# ---------------------------------------------------------------------------
# square pulses


@dataclass
class PulseEndpoint:
    """State on the shifted manifold when a pulse switches off.

    ``trace`` lists the hybrid segments as dicts with keys ``kind``
    (``"jump"`` or ``"slide"``), ``branch``, ``start``, ``end`` and
    ``duration`` (slow time; zero for jumps). ``parked`` is set when the
    shifted reduced flow has an equilibrium ahead of the state, which then
    creeps towards it instead of reaching a fold; the endpoint snaps onto
    the equilibrium once within 1e-9 of it.
    """

    x: float
    z: float
    branch: Branch
    parked: bool = False
    trace: list[dict] = field(default_factory=list)

    @property
    def n_jumps(self) -> int:
        return sum(1 for seg in self.trace if seg["kind"] == "jump")


def _arc_end(geom: ManifoldGeometry, branch: Branch, z: float, u_bar: float, up: bool):
    """Far end of the arc reached by sliding from ``z``: a fold or the domain edge."""
    lo, hi = geom.branch_domain(branch, u_bar)
    end = hi if up else lo
    is_fold = (branch is Branch.UPPER and up) or (branch is Branch.LOWER and not up)
    return end, is_fold


def _equilibrium_on_arc(geom, branch, z0, z1, u_bar, n=129):
    zs = np.linspace(z0, z1, n)
    gs = np.array([_slow_speed(geom, branch, z, u_bar) for z in zs])
    s0 = np.sign(gs[0])
    bad = np.nonzero(np.sign(gs) != s0)[0]
    if len(bad) == 0:
        return None
    k = bad[0]
    return brentq(lambda z: _slow_speed(geom, branch, z, u_bar), zs[k - 1], zs[k],
                  xtol=1e-15, rtol=1e-15)


def _slide_to_equilibrium(geom, branch, z0, z_eq, u_bar, duration, snap=1e-9):
    sol = solve_ivp(lambda t, y: [_slow_speed(geom, branch, y[0], u_bar)], (0.0, duration),
                    [z0], method="DOP853", rtol=1e-12, atol=1e-14)
    z = float(np.clip(sol.y[0, -1], min(z0, z_eq), max(z0, z_eq)))
    return z_eq if abs(z - z_eq) < snap else z


def pulse_endpoint(orbit: SingularOrbit, u_bar: float, duration_slow: float,
                   theta: float) -> PulseEndpoint:
    """Hybrid singular evolution under a constant input ``u_bar``.

    Starting from the orbit point at ``theta``, the state jumps onto the
    branch of the shifted manifold whose basin contains it, then slides
    with the shifted reduced flow, jumping at shifted folds, until the
    slow-time budget ``duration_slow`` is spent.
    """
    if not duration_slow >= 0:
        raise ValueError(f"duration_slow must be >= 0, got {duration_slow}")
    geom = orbit.geom
    x0, z, _ = orbit_point(orbit, theta)
    branch = basin_of(geom, x0, z, u_bar)
    x = branch_solve(geom, z, branch, u_bar)
    trace = [dict(kind="jump", branch=branch, start=(x0, z), end=(x, z), duration=0.0)]
    remaining = float(duration_slow)

    for _ in range(1000):
        if remaining <= 0.0:
            break
        g0 = _slow_speed(geom, branch, z, u_bar)
        if abs(g0) < SLOW_FIELD_TOL:
            return PulseEndpoint(x, z, branch, parked=True, trace=trace)
        up = g0 > 0
        end, is_fold = _arc_end(geom, branch, z, u_bar, up)
        z_eq = _equilibrium_on_arc(geom, branch, z, end, u_bar)
        if z_eq is not None:
            # the state is trapped: it approaches the equilibrium but never
            # reaches it, so follow the reduced ODE for the rest of the budget
            z_new = _slide_to_equilibrium(geom, branch, z, z_eq, u_bar, remaining)
            x_new = branch_solve(geom, z_new, branch, u_bar)
            trace.append(dict(kind="slide", branch=branch, start=(x, z), end=(x_new, z_new),
                              duration=remaining))
            return PulseEndpoint(x_new, z_new, branch, parked=True, trace=trace)
        t_arc = psi(geom, branch, z, end, u_bar, check=False)
        if t_arc > remaining:
            z_new = _solve_travel(geom, branch, z, end, u_bar, remaining)
            x_new = branch_solve(geom, z_new, branch, u_bar)
            trace.append(dict(kind="slide", branch=branch, start=(x, z), end=(x_new, z_new),
                              duration=remaining))
            x, z = x_new, z_new
            remaining = 0.0
            break
        if not is_fold:
            raise BranchOutOfDomain(
                f"pulse drives the state past the {branch.value} branch domain edge z={end}"
            )
        x_fold = branch_solve(geom, end, branch, u_bar)
        trace.append(dict(kind="slide", branch=branch, start=(x, z), end=(x_fold, end),
                          duration=t_arc))
        remaining -= t_arc
        branch = branch.opposite
        z = end
        x = branch_solve(geom, z, branch, u_bar)
        trace.append(dict(kind="jump", branch=branch, start=(x_fold, z), end=(x, z),
                          duration=0.0))
    else:
        raise RuntimeError("pulse_endpoint did not finish within 1000 segments")
    return PulseEndpoint(x, z, branch, parked=False, trace=trace)


def prc_pulse(orbit: SingularOrbit, u_bar: float, duration_slow: float, theta: float) -> float:
    """Singular phase shift of a square pulse started at phase ``theta``.

    After the pulse the state drops back onto the unshifted manifold, so its
    phase is ``phase_of`` at the pulse endpoint; the shift compares it with
    the unperturbed phase ``theta + omega * duration``.
    """
    if duration_slow == 0 or u_bar == 0:
        return 0.0
    end = pulse_endpoint(orbit, u_bar, duration_slow, theta)
    return wrap_shift(phase_of(orbit, end.x, end.z)
                      - (wrap_phase(theta) + orbit.omega_slow * duration_slow))


def prc_singular(orbit: SingularOrbit, signal: InputSignal, n_samples: int,
                 theta: np.ndarray | None = None) -> PrcCurve:
    """Singular PRC on the uniform grid ``2*pi*k/n_samples`` (or on ``theta``)."""
    if theta is None:
        theta = TWO_PI * np.arange(n_samples) / n_samples if n_samples > 0 else np.zeros(0)
    theta = np.asarray(theta, dtype=float)
    if signal is None:
        shifts = np.zeros_like(theta)
    elif isinstance(signal, Impulse):
        shifts = np.array([prc_impulse(orbit, signal.alpha, t) for t in theta])
    elif isinstance(signal, SquarePulse):
        d = signal.slow_duration(orbit.period_slow)
        shifts = np.array([prc_pulse(orbit, signal.u_bar, d, t) for t in theta])
    else:
        raise TypeError(f"unsupported input {signal!r}")
    return PrcCurve(theta, shifts, "singular", signal, 0.0)
