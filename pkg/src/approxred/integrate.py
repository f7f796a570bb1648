"""Initial value problem solvers producing :class:`~approxred.core.Trajectory`.

Two methods are offered: a hand-rolled fixed-step classical RK4 and the
adaptive Dormand-Prince RK45 stepper from scipy, driven step by step so the
step budget and blow-up detection contracts can be enforced uniformly.

Downstream tolerances: every comparison made on integrated trajectories adds
slack of ten times the integrator tolerance, so the defaults (rtol = atol =
1e-9) support assertions at the 1e-8 level.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import RK45
from scipy.interpolate import CubicHermiteSpline

from .core import (
    ControlSystemDef,
    DivergenceError,
    InputError,
    StepBudgetError,
    Trajectory,
    VectorFieldDef,
    as_state,
)

DEFAULT_RTOL = 1e-9
DEFAULT_ATOL = 1e-9
DEFAULT_MAX_STEPS = 10_000_000


@dataclass(frozen=True)
class IntegratorConfig:
    """Integration settings.

    ``method`` is "rk45" (adaptive, uses rtol/atol) or "rk4" (fixed step,
    uses dt). ``max_steps`` bounds the number of accepted steps.
    """

    t_end: float
    method: str = "rk45"
    dt: float | None = None
    rtol: float = DEFAULT_RTOL
    atol: float = DEFAULT_ATOL
    max_steps: int = DEFAULT_MAX_STEPS

    def __post_init__(self):
        if self.method not in ("rk4", "rk45"):
            raise InputError(f"unknown integration method {self.method!r}")
        if not (self.t_end > 0):
            raise InputError("t_end must be positive")
        if self.method == "rk4":
            if self.dt is None or not (self.dt > 0):
                raise InputError("rk4 requires a positive fixed step dt")
        else:
            if not (self.rtol > 0 and self.atol > 0):
                raise InputError("rk45 requires positive rtol and atol")
        if self.max_steps < 2:
            raise InputError("max_steps must be at least 2")


def _integrate_rhs(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    x0: np.ndarray,
    cfg: IntegratorConfig,
    label: str,
) -> Trajectory:
    """Drive ``rhs(t, y)`` from 0 to cfg.t_end and collect the step grid."""
    if cfg.method == "rk4":
        return _rk4_loop(rhs, x0, cfg, label)
    return _rk45_loop(rhs, x0, cfg, label)


def _rk4_loop(rhs, x0, cfg, label) -> Trajectory:
    n_full = int(np.floor(cfg.t_end / cfg.dt + 1e-12))
    remainder = cfg.t_end - n_full * cfg.dt
    n_steps = n_full + (1 if remainder > 1e-12 * cfg.t_end else 0)
    if n_steps < 1:
        n_steps, n_full, remainder = 1, 0, cfg.t_end
    if n_steps > cfg.max_steps:
        raise StepBudgetError(
            f"{label}: {n_steps} rk4 steps exceed the budget of {cfg.max_steps}", 0.0
        )
    times = np.empty(n_steps + 1)
    states = np.empty((n_steps + 1, x0.shape[0]))
    derivs = np.empty_like(states)
    times[0] = 0.0
    states[0] = x0
    t, y = 0.0, x0.copy()
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(n_steps):
            h = cfg.dt if i < n_full else remainder
            k1 = rhs(t, y)
            derivs[i] = k1
            k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1)
            k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2)
            k4 = rhs(t + h, y + h * k3)
            y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            t = cfg.t_end if i == n_steps - 1 else t + h
            if not np.all(np.isfinite(y)):
                raise DivergenceError(
                    f"{label}: state became non-finite after t={times[i]:.6g}",
                    times[i],
                )
            times[i + 1] = t
            states[i + 1] = y
        derivs[n_steps] = rhs(t, y)
    return Trajectory(times=times, states=states, dim=x0.shape[0], derivs=derivs)


def _rk45_loop(rhs, x0, cfg, label) -> Trajectory:
    with np.errstate(over="ignore", invalid="ignore"):
        solver = RK45(
            rhs, 0.0, x0, cfg.t_end, rtol=cfg.rtol, atol=cfg.atol, first_step=None
        )
        times = [0.0]
        states = [x0.copy()]
        derivs = [np.asarray(rhs(0.0, x0), dtype=float)]
        steps = 0
        while solver.status == "running":
            if steps >= cfg.max_steps:
                raise StepBudgetError(
                    f"{label}: step budget of {cfg.max_steps} exhausted at "
                    f"t={times[-1]:.6g}",
                    times[-1],
                )
            message = solver.step()
            if not np.all(np.isfinite(solver.y)):
                raise DivergenceError(
                    f"{label}: state became non-finite after t={times[-1]:.6g}",
                    times[-1],
                )
            times.append(solver.t)
            states.append(solver.y.copy())
            derivs.append(np.asarray(solver.f, dtype=float))
            steps += 1
        if solver.status == "failed":
            raise DivergenceError(
                f"{label}: adaptive step size underflow near t={times[-1]:.6g}"
                + (f" ({message})" if message else ""),
                times[-1],
            )
    return Trajectory(
        times=np.array(times),
        states=np.array(states),
        dim=x0.shape[0],
        derivs=np.array(derivs),
    )


def integrate_field(f: VectorFieldDef, x0, cfg: IntegratorConfig) -> Trajectory:
    """Solve dx/dt = f(x) from x0 over [0, cfg.t_end]."""
    x0 = as_state(x0, f.n)
    return _integrate_rhs(lambda _t, y: np.asarray(f.rhs(y), dtype=float), x0, cfg, f.name)


class InputSignal:
    """A time-indexed input u(t) on [0, t_end].

    Either wraps a callable (assumed defined wherever it is asked) or a
    sampled grid with linear interpolation between the nodes. Evaluation
    outside the grid's span raises :class:`InputError`.
    """

    def __init__(self, fn: Callable[[float], np.ndarray], m_in: int, span=None):
        self._fn = fn
        self.m_in = m_in
        self.span = span

    @classmethod
    def from_callable(cls, fn: Callable[[float], object], m_in: int) -> "InputSignal":
        return cls(lambda t: as_state(fn(t), m_in), m_in)

    @classmethod
    def constant(cls, value) -> "InputSignal":
        v = as_state(value)
        return cls(lambda _t: v, v.shape[0])

    @classmethod
    def from_grid(cls, times, values) -> "InputSignal":
        times = np.asarray(times, dtype=float)
        values = np.atleast_2d(np.asarray(values, dtype=float))
        if values.shape[0] != times.shape[0]:
            values = values.T
        if values.shape[0] != times.shape[0]:
            raise InputError("input grid values do not match the time grid")
        if not np.all(np.diff(times) > 0):
            raise InputError("input grid times must be strictly increasing")
        m_in = values.shape[1]

        def fn(t: float) -> np.ndarray:
            if t < times[0] or t > times[-1]:
                raise InputError(
                    f"input signal undefined at t={t:.6g}; grid spans "
                    f"[{times[0]:.6g}, {times[-1]:.6g}]"
                )
            return np.array([np.interp(t, times, values[:, j]) for j in range(m_in)])

        return cls(fn, m_in, span=(float(times[0]), float(times[-1])))

    def __call__(self, t: float) -> np.ndarray:
        return self._fn(t)


def integrate_control(
    F: ControlSystemDef, x0, u, cfg: IntegratorConfig
) -> Trajectory:
    """Solve dx/dt = F(x, u(t)) from x0 over [0, cfg.t_end].

    ``u`` may be an :class:`InputSignal`, a plain callable t -> R^m_in, or a
    constant vector.
    """
    x0 = as_state(x0, F.n)
    if isinstance(u, InputSignal):
        sig = u
    elif callable(u):
        sig = InputSignal.from_callable(u, F.m_in)
    else:
        sig = InputSignal.constant(u)
    if sig.m_in != F.m_in:
        raise InputError(
            f"input signal dimension {sig.m_in} does not match m_in={F.m_in}"
        )
    if sig.span is not None and sig.span[1] < cfg.t_end:
        raise InputError(
            f"input signal defined up to t={sig.span[1]:.6g} but horizon is "
            f"{cfg.t_end:.6g}"
        )
    return _integrate_rhs(
        lambda t, y: np.asarray(F.rhs(y, sig(t)), dtype=float), x0, cfg, F.name
    )


def resample(traj: Trajectory, times) -> Trajectory:
    """Interpolate a trajectory onto a new valid trajectory grid.

    Cubic Hermite interpolation is used when node derivatives are stored,
    linear interpolation otherwise; original nodes reproduce exactly. The
    requested grid must start at 0, be strictly increasing, and stay within
    the original span (no extrapolation).
    """
    new_times = np.asarray(times, dtype=float)
    if new_times.ndim != 1 or new_times.shape[0] < 2:
        raise InputError("resample grid needs at least two time points")
    if new_times[0] != 0.0 or not np.all(np.diff(new_times) > 0):
        raise InputError("resample grid must start at 0 and be strictly increasing")
    if new_times[-1] > traj.times[-1]:
        raise InputError(
            f"resample grid ends at {new_times[-1]:.6g}, beyond the trajectory "
            f"horizon {traj.times[-1]:.6g}"
        )
    if traj.derivs is not None:
        spline = CubicHermiteSpline(traj.times, traj.states, traj.derivs, axis=0)
        states = spline(new_times)
        derivs = spline.derivative()(new_times)
    else:
        states = np.column_stack(
            [np.interp(new_times, traj.times, traj.states[:, j]) for j in range(traj.dim)]
        )
        derivs = None
    return Trajectory(times=new_times, states=states, dim=traj.dim, derivs=derivs)
