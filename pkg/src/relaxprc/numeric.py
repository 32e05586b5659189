"""Simulation of the oscillator at finite epsilon.

Everything here works in the fast time scale ``t``. Numerical phase is
elapsed time since the cycle's point of minimum ``z`` times the fast angular
frequency; that anchor shadows the lower fold, which is phase 0 in the
singular limit.
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp, trapezoid
from scipy.interpolate import CubicSpline

from .errors import (
    MonodromyIllConditioned,
    NoOscillation,
    NonFiniteState,
    NotConverged,
    SampleErrors,
    StepSizeUnderflow,
)
from .model import Branch, FastSlowSystem, branch_solve, fold_points
from .singular import (
    TWO_PI,
    Impulse,
    InputSignal,
    PrcCurve,
    SingularOrbit,
    SquarePulse,
    build_orbit,
    critical_z,
    prc_singular,
    wrap_phase,
    wrap_shift,
)

__all__ = [
    "Trajectory",
    "LimitCycle",
    "Iprc",
    "SweepReport",
    "integrate",
    "find_limit_cycle",
    "numeric_phase_shift",
    "prc_numeric",
    "iprc_adjoint",
    "convolve_iprc",
    "error_sweep",
    "exclusion_phases",
]

RTOL = 1e-9
ATOL = 1e-11
METHOD = "DOP853"


@dataclass
class Trajectory:
    """Piecewise dense solution of the forced system.

    ``t`` and ``y`` hold the accepted steps (``y`` has shape ``(n, 2)``);
    ``pieces`` are the scipy dense-output objects, one per smooth segment
    between input discontinuities. ``events`` collects the times and states
    of any event functions passed to `integrate`.
    """

    t: np.ndarray
    y: np.ndarray
    pieces: list = field(default_factory=list, repr=False)
    event_t: list = field(default_factory=list)
    event_y: list = field(default_factory=list)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        out = np.empty((len(t), 2))
        # later pieces win at shared boundaries (post-jump state)
        for lo, hi, sol in self.pieces:
            m = (t >= lo) & (t <= hi)
            if np.any(m):
                out[m] = sol(t[m]).T
        return out[0] if scalar else out

    @property
    def final(self) -> np.ndarray:
        return self.y[-1]


def _rhs(sys: FastSlowSystem, u: float) -> Callable:
    f = sys.f
    g0, gx, gz = sys.g_coeffs
    base = sys.baseline + u
    eps = sys.epsilon

    def rhs(t, y):
        x, z = y
        return [f(x) + base - z, eps * (g0 + gx * x + gz * z)]

    return rhs


def _solve(sys, u, y0, t0, t1, rtol, atol, events, dense):
    sol = solve_ivp(_rhs(sys, u), (t0, t1), y0, method=METHOD, rtol=rtol, atol=atol,
                    events=events or None, dense_output=dense)
    if sol.status == -1:
        raise StepSizeUnderflow(sol.message)
    if not np.all(np.isfinite(sol.y)):
        raise NonFiniteState(f"non-finite state reached near t={sol.t[-1]}")
    return sol


def _pieces(signal: InputSignal, t0: float, t1: float, onset: float, pulse_fast: float | None):
    """Split ``[t0, t1]`` into ``(start, end, u, kick)`` pieces of constant input."""
    if signal is None or not (t0 <= onset <= t1):
        if isinstance(signal, SquarePulse) and onset < t0 < onset + pulse_fast:
            # span starts inside the pulse
            cut = min(onset + pulse_fast, t1)
            out = [(t0, cut, signal.u_bar, 0.0)]
            if cut < t1:
                out.append((cut, t1, 0.0, 0.0))
            return out
        return [(t0, t1, 0.0, 0.0)]
    out = []
    if onset > t0:
        out.append((t0, onset, 0.0, 0.0))
    if isinstance(signal, Impulse):
        out.append((onset, t1, 0.0, float(signal.alpha)))
    else:
        end = min(onset + pulse_fast, t1)
        if end > onset:
            out.append((onset, end, float(signal.u_bar), 0.0))
        if end < t1:
            out.append((end, t1, 0.0, 0.0))
    return out


def integrate(sys: FastSlowSystem, state0, t_span: tuple[float, float],
              signal: InputSignal = None, *, onset: float | None = None,
              pulse_fast: float | None = None, rtol: float = RTOL, atol: float = ATOL,
              events: Sequence[Callable] = (), dense: bool = True) -> Trajectory:
    """Integrate the forced system with an embedded Runge-Kutta pair.

    An impulse is applied as an exact jump ``x -> x + alpha`` at ``onset``;
    a square pulse switches ``u`` on at ``onset`` and off ``pulse_fast``
    time units later. The integration restarts at each switch so no step
    straddles a discontinuity.

    Parameters
    ----------
    sys : FastSlowSystem
        Must have ``epsilon > 0``.
    state0 : array_like
        Initial ``(x, z)``.
    t_span : tuple
        Fast-time interval.
    signal : Impulse, SquarePulse or None
    onset : float, optional
        Input onset time; defaults to ``t_span[0]``.
    pulse_fast : float, optional
        Pulse duration in fast time. Defaults to ``duration_slow / epsilon``
        for a pulse given in slow time.
    events : sequence of callables
        scipy-style event functions; their roots are gathered across all
        pieces into ``Trajectory.event_t`` / ``event_y``.
    """
    if not sys.epsilon > 0:
        raise ValueError("numerical integration needs epsilon > 0")
    t0, t1 = map(float, t_span)
    if not (math.isfinite(t0) and math.isfinite(t1)) or t1 < t0:
        raise ValueError(f"bad time span {t_span}")
    onset = t0 if onset is None else float(onset)
    if isinstance(signal, SquarePulse) and pulse_fast is None:
        if signal.duration_slow is None:
            raise ValueError("a pulse given as a period fraction needs pulse_fast")
        pulse_fast = signal.duration_slow / sys.epsilon
    y = np.array(state0, dtype=float)
    ts, ys, pieces = [np.array([t0])], [y[None, :]], []
    ev_t, ev_y = [], []
    for a, b, u, kick in _pieces(signal, t0, t1, onset, pulse_fast):
        if kick:
            y = y + np.array([kick, 0.0])
            ts.append(np.array([a]))
            ys.append(y[None, :])
        if b <= a:
            continue
        sol = _solve(sys, u, y, a, b, rtol, atol, list(events), dense)
        ts.append(sol.t[1:])
        ys.append(sol.y[:, 1:].T)
        if dense:
            pieces.append((a, b, sol.sol))
        if events:
            for k in range(len(events)):
                ev_t.extend(sol.t_events[k])
                ev_y.extend(sol.y_events[k])
        y = sol.y[:, -1].copy()
    return Trajectory(np.concatenate(ts), np.concatenate(ys), pieces, ev_t, ev_y)


# ---------------------------------------------------------------------------
# limit cycle


@dataclass
class LimitCycle:
    """Attracting periodic orbit at finite epsilon.

    Phase 0 is ``anchor``, the point of minimum ``z``. ``section_phase`` is
    the phase at which the cycle crosses the Poincare section
    ``z = section_z`` upward.
    """

    system: FastSlowSystem
    period_fast: float
    anchor: np.ndarray
    section_z: float
    section_phase: float
    closure_error: float
    return_displacement: float
    solution: Trajectory = field(repr=False)
    anchor_z_offset: float = float("nan")

    @property
    def epsilon(self) -> float:
        return self.system.epsilon

    @property
    def period_slow(self) -> float:
        return self.epsilon * self.period_fast

    @property
    def omega_fast(self) -> float:
        return TWO_PI / self.period_fast

    @property
    def omega_slow(self) -> float:
        return TWO_PI / self.period_slow

    def state_at(self, theta):
        """Cycle state(s) at phase ``theta``."""
        return self.solution(wrap_phase(theta) / self.omega_fast)

    def samples(self, n: int):
        theta = TWO_PI * np.arange(n) / n
        return theta, self.state_at(theta)


def _section_event(z_sec: float):
    def ev(t, y):
        return y[1] - z_sec
    ev.direction = 1.0
    return ev


def _upward_crossings(traj: Trajectory):
    return [(t, y) for t, y in zip(traj.event_t, traj.event_y) if y[0] > 0]


def find_limit_cycle(sys: FastSlowSystem, *, rtol: float = 1e-11, atol: float = 1e-13,
                     transient_periods: float = 3.0, max_periods: float = 60.0,
                     tol: float = 1e-8) -> LimitCycle:
    """Converge onto the limit cycle and measure its period.

    Starts at the landing point of the lower-fold jump, discards
    ``transient_periods`` nominal periods (nominal = singular slow period /
    epsilon), then records crossings of the section
    ``{z = (z_minus + z_plus)/2, dz/dt > 0, x > 0}`` until two successive
    crossing states agree to ``tol``. The period is the time between them.
    """
    geom = fold_points(sys)
    orbit = build_orbit(geom)
    T_nom = orbit.period_slow / sys.epsilon
    z_sec = 0.5 * (geom.z_minus + geom.z_plus)
    y = np.array([branch_solve(geom, geom.z_minus, Branch.UPPER), geom.z_minus])
    y = integrate(sys, y, (0.0, transient_periods * T_nom), rtol=rtol, atol=atol,
                  dense=False).final

    ev = _section_event(z_sec)
    t_now, last = 0.0, None
    period = displacement = None
    while t_now < max_periods * T_nom:
        traj = integrate(sys, y, (t_now, t_now + 2.0 * T_nom), rtol=rtol, atol=atol,
                         events=[ev], dense=False)
        for tc, yc in _upward_crossings(traj):
            if last is not None:
                displacement = float(np.linalg.norm(yc - last[1]))
                if displacement < tol:
                    period = tc - last[0]
                    y_sec = yc
                    break
            last = (tc, yc)
        if period is not None:
            break
        t_now += 2.0 * T_nom
        y = traj.final
    if period is None:
        if last is None or displacement is None:
            raise NoOscillation(f"fewer than two section crossings within {max_periods} periods")
        raise NotConverged(f"section return map did not settle (last displacement {displacement})")

    # anchor: minimum of z, i.e. g changes sign from - to +
    g0, gx, gz = sys.g_coeffs

    def zmin(t, y):
        return g0 + gx * y[0] + gz * y[1]
    zmin.direction = 1.0
    traj = integrate(sys, y_sec, (0.0, period), rtol=rtol, atol=atol, events=[zmin],
                     dense=False)
    if not traj.event_t:
        raise NoOscillation("no minimum of z found on the cycle")
    t_a = traj.event_t[0]
    anchor = np.asarray(traj.event_y[0], dtype=float)
    cyc = integrate(sys, anchor, (0.0, period), rtol=rtol, atol=atol)
    closure = float(np.linalg.norm(cyc.final - anchor))
    return LimitCycle(
        system=sys,
        period_fast=float(period),
        anchor=anchor,
        section_z=z_sec,
        section_phase=wrap_phase(TWO_PI * (period - t_a) / period),
        closure_error=closure,
        return_displacement=float(displacement),
        solution=cyc,
        anchor_z_offset=float(anchor[1] - geom.z_minus),
    )


# ---------------------------------------------------------------------------
# finite phase response


def _input_end(signal: InputSignal, pulse_fast: float) -> float:
    if isinstance(signal, SquarePulse):
        return pulse_fast
    return 0.0


def _crossing_times(sys, y0, signal, pulse_fast, t_max, chunk, z_sec, rtol, atol,
                    after, done=lambda times: False):
    """Upward section crossings (``x > 0``) later than ``after`` of the trajectory
    from ``y0``, integrated in chunks of length ``chunk`` until ``done(times)``
    or ``t_max``. Returns the crossing times and the time reached."""
    ev = _section_event(z_sec)
    times = []
    t, y = 0.0, np.asarray(y0, dtype=float)
    first = True
    while t < t_max:
        t1 = min(t + chunk, t_max)
        traj = integrate(sys, y, (t, t1), signal if first else None, onset=0.0,
                         pulse_fast=pulse_fast, rtol=rtol, atol=atol, events=[ev], dense=False)
        first = False
        times.extend(tc for tc, yc in _upward_crossings(traj) if tc > after)
        t, y = t1, traj.final
        if done(times):
            break
    return times, t


def numeric_phase_shift(sys: FastSlowSystem, cycle: LimitCycle, signal: InputSignal,
                        theta: float, *, horizon_periods: int = 12, drift_tol: float = 1e-6,
                        reference: str = "paired", rtol: float = RTOL,
                        atol: float = ATOL) -> float:
    """Asymptotic phase shift caused by ``signal`` applied at cycle phase ``theta``.

    The forced trajectory is followed until successive section crossings are
    one period apart to within ``drift_tol`` radians of phase. Its last
    crossing is then compared with the unforced crossings: with
    ``reference="paired"`` these come from integrating the unforced system
    from the same start state on the same chunk schedule, so discretization
    errors largely cancel; with ``reference="cycle"`` they are predicted from
    the stored cycle. Advances are positive. The horizon is doubled once
    before giving up.

    Raises
    ------
    NotConverged
        If the crossings are still drifting after ``2 * horizon_periods``.
    """
    if reference not in ("paired", "cycle"):
        raise ValueError("reference must be 'paired' or 'cycle'")
    T = cycle.period_fast
    w = cycle.omega_fast
    theta = wrap_phase(theta)
    y0 = cycle.state_at(theta)
    pulse_fast = None
    if isinstance(signal, SquarePulse):
        pulse_fast = signal.fast_duration(sys.epsilon, T)
    end = _input_end(signal, pulse_fast or 0.0)
    chunk = 2.0 * T + end

    def settled(times):
        return len(times) >= 3 and w * abs((times[-1] - times[-2]) - T) < drift_tol

    for horizon in (horizon_periods, 2 * horizon_periods):
        times, t_reached = _crossing_times(sys, y0, signal, pulse_fast, horizon * T + end,
                                           chunk, cycle.section_z, rtol, atol, end, settled)
        if settled(times):
            break
    else:
        raise NotConverged(f"phase shift at theta={theta} still drifting after "
                           f"{2 * horizon_periods} periods")

    t_last = times[-1]
    if reference == "cycle":
        t_ref = ((cycle.section_phase - theta) % TWO_PI) / w
    else:
        ref, _ = _crossing_times(sys, y0, None, None, t_reached + T, chunk, cycle.section_z,
                                 rtol, atol, -1.0)
        ref = np.asarray(ref)
        t_ref = float(ref[np.argmin(np.abs(ref - t_last))])
    return float(wrap_shift(w * (t_ref - t_last)))


def _shift_job(args):
    sys, cycle, signal, theta, kwargs = args
    try:
        return numeric_phase_shift(sys, cycle, signal, theta, **kwargs), None
    except Exception as exc:  # aggregated by the caller
        return float("nan"), exc


def _resolve_threads(threads: int) -> int:
    if threads == 0:
        return os.cpu_count() or 1
    return max(1, int(threads))


def _map_jobs(fn, jobs, threads):
    n = _resolve_threads(threads)
    if n == 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=min(n, len(jobs))) as pool:
        return list(pool.map(fn, jobs, chunksize=max(1, len(jobs) // (4 * n))))


def prc_numeric(sys: FastSlowSystem, signal: InputSignal, n_samples: int, *,
                cycle: LimitCycle | None = None, theta: np.ndarray | None = None,
                threads: int = 1, **shift_kwargs) -> PrcCurve:
    """Numerical finite PRC on the uniform grid ``2*pi*k/n_samples``.

    Samples are independent and are farmed out to ``threads`` worker
    processes (``0`` = one per CPU). Failed samples are collected and raised
    together as `SampleErrors`.
    """
    if theta is None:
        theta = TWO_PI * np.arange(n_samples) / n_samples if n_samples > 0 else np.zeros(0)
    theta = np.asarray(theta, dtype=float)
    if len(theta) == 0:
        return PrcCurve(theta, np.zeros(0), "numeric", signal, sys.epsilon)
    if cycle is None:
        cycle = find_limit_cycle(sys)
    jobs = [(sys, cycle, signal, float(t), shift_kwargs) for t in theta]
    results = _map_jobs(_shift_job, jobs, threads)
    failures = [(k, theta[k], exc) for k, (_, exc) in enumerate(results) if exc is not None]
    if failures:
        raise SampleErrors(failures)
    return PrcCurve(theta, np.array([r for r, _ in results]), "numeric", signal, sys.epsilon)


# ---------------------------------------------------------------------------
# infinitesimal PRC


@dataclass
class Iprc:
    """Infinitesimal PRC: phase gradient along the cycle.

    ``q`` is the x-component (radians per unit impulse area), ``q_z`` the
    z-component. ``residual`` is the largest relative deviation of
    ``q . F`` from ``omega_fast`` over the grid.
    """

    theta: np.ndarray
    q: np.ndarray
    q_z: np.ndarray
    epsilon: float
    period_fast: float
    residual: float
    log_floquet: float

    @property
    def omega_fast(self) -> float:
        return TWO_PI / self.period_fast

    def spline(self) -> CubicSpline:
        th = np.append(self.theta, TWO_PI)
        return CubicSpline(th, np.append(self.q, self.q[0]), bc_type="periodic")

    def __call__(self, theta):
        return self.spline()(wrap_phase(theta))


def iprc_adjoint(sys: FastSlowSystem, cycle: LimitCycle, n_samples: int, *,
                 n_periods: int = 3, rtol: float = 1e-11, atol: float = 1e-13) -> Iprc:
    """Infinitesimal PRC from the adjoint variational equation.

    Integrates ``dQ/dt = -J(gamma(t))^T Q`` backward in time for
    ``n_periods`` periods, where the periodic solution is attracting, then
    scales ``Q`` so that ``Q . F = omega_fast`` at phase 0. The relation
    holds for all phases for an exact periodic solution; its worst relative
    violation on the grid is reported as ``residual``.
    """
    if n_samples <= 0:
        raise ValueError("n_samples must be positive")
    T = cycle.period_fast
    w = TWO_PI / T
    eps = sys.epsilon
    _, gx, gz = sys.g_coeffs
    gamma = cycle.solution

    def rhs(t, Q):
        x = gamma(t)[0]
        d = sys.df(x)
        return [-(d * Q[0] + eps * gx * Q[1]), Q[0] - eps * gz * Q[1]]

    # transverse Floquet exponent, from the trace of the Jacobian
    tt = np.linspace(0.0, T, 4097)
    tr = sys.df(gamma(tt)[:, 0]) + eps * gz
    log_floquet = float(trapezoid(tr, tt))
    if log_floquet < -700.0:
        warnings.warn(
            f"transverse Floquet multiplier exp({log_floquet:.0f}) underflows; "
            "the adjoint converges in one backward period but its decay cannot be resolved",
            MonodromyIllConditioned, stacklevel=2,
        )

    x0, z0 = cycle.anchor
    F0 = np.array(sys.vector_field(x0, z0))
    Q = w * F0 / F0.dot(F0)
    for _ in range(n_periods - 1):
        sol = solve_ivp(rhs, (T, 0.0), Q, method=METHOD, rtol=rtol, atol=atol)
        Q = sol.y[:, -1]
        Q = Q * (w / Q.dot(F0))
    sol = solve_ivp(rhs, (T, 0.0), Q, method=METHOD, rtol=rtol, atol=atol, dense_output=True)
    theta = TWO_PI * np.arange(n_samples) / n_samples
    t = theta / w
    Qs = sol.sol(t)
    Qs = Qs * (w / Qs[:, 0].dot(F0))
    states = gamma(t)
    F = np.array([sys.vector_field(x, z) for x, z in states])
    dots = np.einsum("ij,ji->i", F, Qs)
    residual = float(np.max(np.abs(dots - w)) / w)
    return Iprc(theta, Qs[0].copy(), Qs[1].copy(), eps, T, residual, log_floquet)


def _periodic_integral(spl: CubicSpline, total: float, a: float, b: float) -> float:
    """Integral of a 2*pi-periodic spline over ``[a, b]`` with ``b >= a``."""
    n_full, rest = divmod(b - a, TWO_PI)
    a = wrap_phase(a)
    b = a + rest
    if b <= TWO_PI:
        part = spl.integrate(a, b)
    else:
        part = spl.integrate(a, TWO_PI) + spl.integrate(0.0, b - TWO_PI)
    return float(n_full * total + part)


def convolve_iprc(iprc: Iprc, signal: InputSignal, theta: np.ndarray | None = None) -> PrcCurve:
    """First-order PRC prediction from the infinitesimal PRC.

    Impulse: ``alpha * q(theta)``. Square pulse of fast duration ``D``:
    ``u_bar * integral_0^D q(theta + omega s) ds``, evaluated with a periodic
    cubic spline through the iPRC samples.
    """
    if theta is None:
        theta = iprc.theta
    theta = np.asarray(theta, dtype=float)
    if signal is None:
        shifts = np.zeros_like(theta)
    elif isinstance(signal, Impulse):
        if theta is iprc.theta:
            shifts = signal.alpha * iprc.q
        else:
            shifts = signal.alpha * iprc(theta)
    elif isinstance(signal, SquarePulse):
        w = iprc.omega_fast
        D = signal.fast_duration(iprc.epsilon, iprc.period_fast)
        spl = iprc.spline()
        total = float(spl.integrate(0.0, TWO_PI))
        shifts = np.array([signal.u_bar / w * _periodic_integral(spl, total, th, th + w * D)
                           for th in theta])
    else:
        raise TypeError(f"unsupported input {signal!r}")
    return PrcCurve(theta, shifts, "infinitesimal", signal, iprc.epsilon)


# ---------------------------------------------------------------------------
# error against the singular prediction


def exclusion_phases(orbit: SingularOrbit, signal: InputSignal, n_scan: int = 512) -> list[float]:
    """Phases at which the singular PRC is discontinuous or kinked by a fold.

    Always contains the two fold phases. For impulses adds ``theta_c``;
    for pulses, jumps are located by scanning ``n_scan`` samples and
    bisecting each jump to 1e-9.
    """
    phases = [0.0, orbit.theta_plus]
    if isinstance(signal, Impulse) and signal.alpha != 0:
        sign = 1 if signal.alpha > 0 else -1
        phases.append(critical_z(orbit, abs(signal.alpha), sign)[1])
    elif isinstance(signal, SquarePulse):
        curve = prc_singular(orbit, signal, n_scan)
        d = np.abs(wrap_shift(np.diff(np.append(curve.shift, curve.shift[0]))))
        typical = np.median(d)
        jumps = np.nonzero(d > max(20.0 * typical, 0.05))[0]
        for k in jumps:
            lo = curve.theta[k]
            hi = curve.theta[k + 1] if k + 1 < n_scan else TWO_PI
            s_lo = curve.shift[k]
            while hi - lo > 1e-9:
                mid = 0.5 * (lo + hi)
                s_mid = prc_singular(orbit, signal, 0, theta=np.array([mid])).shift[0]
                if abs(wrap_shift(s_mid - s_lo)) < 0.5 * d[k]:
                    lo, s_lo = mid, s_mid
                else:
                    hi = mid
            phases.append(wrap_phase(0.5 * (lo + hi)))
    return sorted(set(phases))


def _band_mask(theta: np.ndarray, phases: Sequence[float], band: float) -> np.ndarray:
    keep = np.ones(len(theta), dtype=bool)
    for p in phases:
        dist = np.abs(wrap_shift(theta - p))
        keep &= dist > band
    return keep


@dataclass
class SweepReport:
    """Outcome of `error_sweep`.

    ``sup_error_singular[k]`` is the sup-distance between the numerical PRC
    at ``epsilons[k]`` and the singular PRC, outside ``band`` radians of the
    ``excluded`` phases; ``sup_error_infinitesimal`` the same for the
    first-order prediction. ``beta_hat`` is the least-squares slope of
    ``log e`` against ``log epsilon``.
    """

    epsilons: np.ndarray
    sup_error_singular: np.ndarray
    sup_error_infinitesimal: np.ndarray
    beta_hat: float
    log_prefactor: float
    band: float
    excluded: list
    period_fast: np.ndarray
    period_slow: np.ndarray
    period_slow_singular: float
    anchor_z_offset: np.ndarray
    singular: PrcCurve
    numeric: list = field(default_factory=list, repr=False)
    infinitesimal: list = field(default_factory=list, repr=False)


def error_sweep(system: FastSlowSystem, epsilons: Sequence[float], signal: InputSignal,
                n_samples: int, *, band: float = 0.05, threads: int = 1,
                iprc_samples: int | None = None, **shift_kwargs) -> SweepReport:
    """Measure how fast the numerical PRC approaches the singular one.

    For each epsilon the numerical PRC, the singular PRC and the first-order
    (infinitesimal) prediction are sampled on the same phase grid; the
    sup-errors skip a band around the singular curve's discontinuities and
    fold phases, where any finite-epsilon curve is smoothed out.
    """
    eps = np.array(sorted(map(float, epsilons), reverse=True))
    if len(eps) < 3:
        raise ValueError("error_sweep needs at least three epsilon values")
    orbit = build_orbit(fold_points(system))
    theta = TWO_PI * np.arange(n_samples) / n_samples
    sing = prc_singular(orbit, signal, n_samples)
    excluded = exclusion_phases(orbit, signal)
    keep = _band_mask(theta, excluded, band)
    if not np.any(keep):
        raise ValueError("exclusion band removes every sample")

    e_sing, e_inf, Tf, Ts, anch, nums, infs = [], [], [], [], [], [], []
    for e in eps:
        sys_e = system.with_epsilon(e)
        cycle = find_limit_cycle(sys_e)
        num = prc_numeric(sys_e, signal, n_samples, cycle=cycle, threads=threads, **shift_kwargs)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", MonodromyIllConditioned)
            iprc = iprc_adjoint(sys_e, cycle, iprc_samples or max(n_samples, 512))
        inf = convolve_iprc(iprc, signal, theta)
        e_sing.append(float(np.max(np.abs(wrap_shift(num.shift - sing.shift))[keep])))
        e_inf.append(float(np.max(np.abs(wrap_shift(num.shift - inf.shift))[keep])))
        Tf.append(cycle.period_fast)
        Ts.append(cycle.period_slow)
        anch.append(cycle.anchor_z_offset)
        nums.append(num)
        infs.append(inf)
    slope, icept = np.polyfit(np.log(eps), np.log(e_sing), 1)
    return SweepReport(eps, np.array(e_sing), np.array(e_inf), float(slope), float(icept),
                       band, excluded, np.array(Tf), np.array(Ts), orbit.period_slow,
                       np.array(anch), sing, nums, infs)
