"""SSPRK(3,3) time stepping with exact-hit sampling."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .operators import SbpOperators
from .scheme import FluxConfig, Mesh, SolutionState, TestCase, rhs_with_traces

# weights of the three stage derivatives in the final SSPRK(3,3) update
STAGE_WEIGHTS = (1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0)


class DivergenceError(FloatingPointError):
    """The state became non-finite, usually a CFL violation."""


@dataclass(frozen=True)
class TimeConfig:
    t_final: float
    cfl: float = 0.025
    sample_interval: float = 0.05
    dt_override: Optional[float] = None

    def __post_init__(self):
        if not self.t_final > 0:
            raise ValueError("t_final must be positive")
        if not self.cfl > 0:
            raise ValueError("cfl must be positive")
        if not self.sample_interval > 0:
            raise ValueError("sample_interval must be positive")
        if self.dt_override is not None and not self.dt_override > 0:
            raise ValueError("dt_override must be positive")


def ssprk33_step(rhs_fn: Callable, u, t: float, dt: float):
    """One step of the three-stage, third-order SSP Runge-Kutta scheme.

    ``rhs_fn(u, t)`` is called exactly three times, at t, t + dt, t + dt/2.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    # overflow is reported through DivergenceError below
    with np.errstate(over="ignore", invalid="ignore"):
        u1 = u + dt * rhs_fn(u, t)
        u2 = 0.75 * u + 0.25 * (u1 + dt * rhs_fn(u1, t + dt))
        out = u / 3.0 + 2.0 / 3.0 * (u2 + dt * rhs_fn(u2, t + 0.5 * dt))
    if not np.all(np.isfinite(out)):
        raise DivergenceError(f"non-finite state after step at t={t:.6g}, dt={dt:.3g}")
    return out


def pick_dt(mesh: Mesh, N: int, cfl: float) -> float:
    return cfl * float(np.min(mesh.dx)) / (2 * N + 1)


def sample_times(t_final: float, sample_interval: float) -> np.ndarray:
    """``k * sample_interval`` for integer k, plus t_final if it is off-grid."""
    n = int(math.floor(t_final / sample_interval + 1e-9))
    times = [k * sample_interval for k in range(n + 1)]
    if t_final - times[-1] > 1e-12 * max(1.0, t_final):
        times.append(t_final)
    else:
        times[-1] = t_final
    return np.array(times)


# boundary quantities integrated alongside the solution
BOUNDARY_TERMS = ("inflow_sq", "outflow_sq", "left_mismatch_sq", "jump_sq")


def _boundary_rates(traces: np.ndarray, g: float) -> np.ndarray:
    jumps = traces[:-1, 1] - traces[1:, 0]
    return np.array([g * g, traces[-1, 1] ** 2, (traces[0, 0] - g) ** 2, float(jumps @ jumps)])


@dataclass
class Sample:
    """Snapshot handed to the sampling callback."""

    t: float
    state: SolutionState
    # time integrals from 0 to t of the BOUNDARY_TERMS
    boundary_integrals: np.ndarray


def integrate(
    initial: SolutionState,
    ops: SbpOperators,
    flux: FluxConfig,
    case: TestCase,
    timecfg: TimeConfig,
    on_sample: Optional[Callable[[Sample], None]] = None,
) -> SolutionState:
    """Advance ``initial`` to ``timecfg.t_final``.

    The squared boundary traces (see ``BOUNDARY_TERMS``) are carried as
    extra ODE components so their time integrals use the same stage
    weights as the solution itself.
    """
    mesh = initial.mesh
    K, n = initial.coeffs.shape
    size = K * n
    dx = mesh.dx
    sigma = flux.sigma
    dt_max = timecfg.dt_override or pick_dt(mesh, ops.N, timecfg.cfl)

    def aug_rhs(y, t):
        u = y[:size].reshape(K, n)
        g = case.inflow(t)
        out = np.empty_like(y)
        du, traces = rhs_with_traces(u, g, ops, sigma, dx)
        out[:size] = du.ravel()
        out[size:] = _boundary_rates(traces, g)
        return out

    y = np.concatenate([initial.coeffs.ravel(), np.zeros(len(BOUNDARY_TERMS))])
    t = initial.t
    if timecfg.t_final <= initial.t:
        raise ValueError("t_final must lie after the initial time")
    targets = initial.t + sample_times(timecfg.t_final - initial.t, timecfg.sample_interval)
    targets[-1] = timecfg.t_final

    def emit(t_now):
        if on_sample is not None:
            st = SolutionState(mesh, y[:size].reshape(K, n).copy(), t_now)
            on_sample(Sample(t_now, st, y[size:].copy()))

    emit(targets[0])
    for target in targets[1:]:
        while True:
            remaining = target - t
            if remaining <= 1e-13 * max(1.0, abs(target)):
                break
            # avoid a sliver step right before a sample time
            if remaining <= dt_max * (1 + 1e-9):
                dt = remaining
            elif remaining < 2 * dt_max:
                dt = 0.5 * remaining
            else:
                dt = dt_max
            y = ssprk33_step(aug_rhs, y, t, dt)
            t = target if dt == remaining else t + dt
        t = target
        emit(target)

    return SolutionState(mesh, y[:size].reshape(K, n).copy(), float(targets[-1]))
