"""Shared explicit Runge-Kutta drivers.

Two integrators are provided for first-order systems y' = f(t, y):

``integrate_dopri45``
    Dormand-Prince 5(4) pair: seven stages, fifth-order propagation with an
    embedded fourth-order error estimate, FSAL, standard PI-free step
    controller (accept when the scaled RMS error is <= 1, step factor
    0.9 * err**(-1/5) clamped to [0.2, 5]). A fourth-order continuous
    extension (dense output) is exposed to the step callback, so callers
    can sample inside accepted steps without extra derivative evaluations.

``integrate_rk4``
    Classic fourth-order Runge-Kutta with a fixed step. Each nominal step
    is taken as two half-steps, which supplies an accurate midpoint state;
    the dense output is a piecewise cubic Hermite on the two halves.

Both drivers support a region guard: when a step (checked at the midpoint
and the endpoint of its dense output) leaves the admissible set, the step
is bisected down to the boundary within 1e-10 and integration stops with
``exited=True``.

The step callback receives ``(t0, y0, t1, y1, dense)`` after every
accepted step, where ``dense(theta)`` evaluates the continuous extension
at t0 + theta*(t1-t0) for theta in [0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError

# Dormand-Prince 5(4) Butcher tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
# fifth-order weights; the seventh stage (FSAL, evaluated at the new point)
# enters only the error estimate and the dense output
_B = np.append(_A[6], 0.0)
# difference between the fifth- and embedded fourth-order weights
_E = np.array(
    [71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40]
)
# dense-output coefficients of the classic fourth-order continuous extension
_D = np.array(
    [
        -12715105075 / 11282082432,
        0.0,
        87487479700 / 32700410799,
        -10690763975 / 1880347072,
        701980252875 / 199316789632,
        -1453857185 / 822651844,
        69997945 / 29380423,
    ]
)

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0
_BOUNDARY_TOL = 1e-10


@dataclass
class IntegratorStats:
    n_steps: int = 0
    n_rejected: int = 0
    n_fev: int = 0


@dataclass
class OdeResult:
    t: float
    y: np.ndarray
    exited: bool
    stats: IntegratorStats = field(default_factory=IntegratorStats)


def _dopri_dense(y0, y1, k, h):
    """Continuous extension over one accepted step.

    Matches y0, y1 and the end slopes exactly; fourth-order accurate in
    the interior.
    """
    ydiff = y1 - y0
    bspl = h * k[0] - ydiff
    r1 = y0
    r2 = ydiff
    r3 = bspl
    r4 = ydiff - h * k[6] - bspl
    r5 = h * (_D @ k)

    def dense(theta):
        th1 = 1.0 - theta
        return r1 + theta * (r2 + th1 * (r3 + theta * (r4 + th1 * r5)))

    return dense


def _locate_boundary(dense, inside, theta_lo, theta_hi):
    """Bisect theta in [lo, hi] with dense(lo) inside and dense(hi) outside
    until the two bracket states agree within 1e-10; returns the inside
    theta."""
    y_lo = dense(theta_lo)
    y_hi = dense(theta_hi)
    for _ in range(200):
        if np.max(np.abs(y_hi - y_lo)) < _BOUNDARY_TOL:
            break
        mid = 0.5 * (theta_lo + theta_hi)
        y_mid = dense(mid)
        if inside(y_mid):
            theta_lo, y_lo = mid, y_mid
        else:
            theta_hi, y_hi = mid, y_mid
    return theta_lo


def _guard_step(t0, h, y0, y1, dense, inside, on_step):
    """Handle a step that may cross the admissible boundary.

    Returns (handled, t, y). When the boundary is crossed the truncated
    step is reported to the callback and (True, t_exit, y_exit) returned.
    """
    mid_inside = inside(dense(0.5))
    end_inside = inside(y1)
    if mid_inside and end_inside:
        return False, t0 + h, y1
    hi = 0.5 if not mid_inside else 1.0
    theta = _locate_boundary(dense, inside, 0.0, hi)
    y_exit = dense(theta)
    t_exit = t0 + theta * h
    if on_step is not None and theta > 0.0:
        trunc = theta

        def clipped(s, _dense=dense, _trunc=trunc):
            return _dense(s * _trunc)

        on_step(t0, y0, t_exit, y_exit, clipped)
    return True, t_exit, y_exit


def integrate_dopri45(
    f,
    t0,
    y0,
    t_end,
    atol=1e-9,
    rtol=1e-9,
    h_init=None,
    h_max=None,
    inside=None,
    on_step=None,
    max_steps=10_000_000,
):
    """Integrate y' = f(t, y) from t0 to t_end adaptively.

    Raises NumericalError on step-size underflow or step-count overflow;
    returns early with ``exited=True`` if the guard reports a boundary
    crossing.
    """
    if t_end <= t0:
        raise ValueError("t_end must exceed t0")
    stats = IntegratorStats()
    y = np.asarray(y0, dtype=float)
    t = float(t0)
    span = t_end - t0
    if h_max is None:
        h_max = span / 10.0
    if h_init is None:
        h = min(h_max, span / 100.0)
    else:
        h = min(h_init, h_max)

    k = np.empty((7, y.size))
    k[0] = f(t, y)
    stats.n_fev += 1

    while t < t_end:
        h = min(h, t_end - t, h_max)
        if h < 1e-14 * max(1.0, abs(t)):
            raise NumericalError(f"step size underflow at t={t!r}")
        if stats.n_steps + stats.n_rejected > max_steps:
            raise NumericalError("step count exceeded")

        for i in range(1, 7):
            yi = y + h * (_A[i][: i] @ k[:i])
            k[i] = f(t + _C[i] * h, yi)
        stats.n_fev += 6
        y1 = y + h * (_B @ k)  # stage 7 already evaluated at (t+h, y1)

        err_vec = h * (_E @ k)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y1))
        err = float(np.sqrt(np.mean((err_vec / scale) ** 2)))

        if err > 1.0:
            stats.n_rejected += 1
            h *= max(_MIN_FACTOR, _SAFETY * err ** (-0.2))
            continue

        dense = _dopri_dense(y, y1, k.copy(), h)
        stats.n_steps += 1
        if inside is not None:
            crossed, t_new, y_new = _guard_step(t, h, y, y1, dense, inside, on_step)
            if crossed:
                return OdeResult(t_new, y_new, True, stats)
        if on_step is not None:
            on_step(t, y, t + h, y1, dense)

        t = t + h
        y = y1
        k[0] = k[6]  # FSAL
        factor = _MAX_FACTOR if err == 0.0 else min(_MAX_FACTOR, _SAFETY * err ** (-0.2))
        h *= max(_MIN_FACTOR, factor)

    return OdeResult(t, y, False, stats)


def _rk4_step(f, t, y, h):
    k1 = f(t, y)
    k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = f(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4), k1


def _hermite(y0, y1, f0, f1, h, theta):
    # cubic Hermite basis on [0, 1] with slopes scaled by h
    t2 = theta * theta
    t3 = t2 * theta
    return (
        (2 * t3 - 3 * t2 + 1) * y0
        + (t3 - 2 * t2 + theta) * h * f0
        + (-2 * t3 + 3 * t2) * y1
        + (t3 - t2) * h * f1
    )


def integrate_rk4(
    f,
    t0,
    y0,
    t_end,
    h,
    inside=None,
    on_step=None,
):
    """Fixed-step RK4 from t0 to t_end; each nominal step is two half-steps.

    The dense output is a piecewise cubic Hermite over the two halves, so
    dense(0.5) is the half-step state itself.
    """
    if t_end <= t0:
        raise ValueError("t_end must exceed t0")
    if h <= 0:
        raise ValueError("step must be positive")
    stats = IntegratorStats()
    y = np.asarray(y0, dtype=float)
    t = float(t0)

    while t < t_end - 1e-12 * max(1.0, abs(t_end)):
        step = min(h, t_end - t)
        half = 0.5 * step
        ym, f0 = _rk4_step(f, t, y, half)
        y1, fm = _rk4_step(f, t + half, ym, half)
        stats.n_fev += 8
        stats.n_steps += 1

        f_end_cache = {}

        def dense(theta, _t=t, _step=step, _y0=y, _ym=ym, _y1=y1, _f0=f0, _fm=fm):
            if theta <= 0.5:
                return _hermite(_y0, _ym, _f0, _fm, 0.5 * _step, theta * 2.0)
            if "f1" not in f_end_cache:
                f_end_cache["f1"] = f(_t + _step, _y1)
                stats.n_fev += 1
            return _hermite(
                _ym, _y1, _fm, f_end_cache["f1"], 0.5 * _step, (theta - 0.5) * 2.0
            )

        if inside is not None:
            crossed, t_new, y_new = _guard_step(t, step, y, y1, dense, inside, on_step)
            if crossed:
                return OdeResult(t_new, y_new, True, stats)
        if on_step is not None:
            on_step(t, y, t + step, y1, dense)
        t += step
        y = y1

    return OdeResult(t, y, False, stats)
