"""Explicit RK4 time integration with constraint monitoring.

The system is non-stiff in scaled units (relaxation rate nu <= 1, wave
speeds of order one), so a fixed-step classical Runge-Kutta scheme driven
by a CFL bound at t = 0 is sufficient; fields only shrink along a run, so
the initial bound stays valid.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import BlowUpDetected, DensityUnderflow, StepLimitExceeded
from .model import ModelParams, State, rhs
from .spectral import SpectralLayout

__all__ = ["IntegratorConfig", "cfl_dt", "step", "integrate"]


@dataclass(frozen=True)
class IntegratorConfig:
    scheme: str = "rk4"
    cfl_number: float = 0.4
    t_max: float = 10.0
    sample_interval: float = 1.0
    max_steps: int = 1_000_000

    def __post_init__(self):
        if self.scheme != "rk4":
            raise ValueError("only the rk4 scheme is supported")
        if not (0.0 < self.cfl_number <= 1.0):
            raise ValueError("cfl_number must lie in (0, 1]")
        if self.t_max < 0.0:
            raise ValueError("t_max must be >= 0")
        if self.sample_interval <= 0.0:
            raise ValueError("sample_interval must be positive")


def cfl_dt(layout: SpectralLayout, params: ModelParams, config: IntegratorConfig) -> float:
    """Fixed step from the grid spacing and the fastest signal speed.

    Acoustic and light speeds are both of order one in scaled units, so the
    bound is cfl * h / max(1, nu); deterministic for a given configuration.
    """
    h = layout.box_length / layout.resolution
    c_max = max(1.0, params.nu)
    return config.cfl_number * h / c_max


def step(U: State, dt: float, params: ModelParams) -> State:
    """One classical 4-stage Runge-Kutta update."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    k1 = rhs(U, params)
    k2 = rhs(U.lincomb([(0.5 * dt, k1)]), params)
    k3 = rhs(U.lincomb([(0.5 * dt, k2)]), params)
    k4 = rhs(U.lincomb([(dt, k3)]), params)
    return U.lincomb([
        (dt / 6.0, k1), (dt / 3.0, k2), (dt / 3.0, k3), (dt / 6.0, k4),
    ])


def integrate(U0: State, config: IntegratorConfig, params: ModelParams,
              observer=None, dt: float | None = None):
    """Advance U0 to t_max, invoking the observer on a fixed sample cadence.

    The observer is called as observer(t, U) at t = 0, every
    ``sample_interval`` thereafter (rounded to whole steps) and at the final
    time.  It must not mutate the state.  Returns the final state.

    Raises BlowUpDetected with the failure time if the density positivity
    check trips inside a step, and StepLimitExceeded if max_steps runs out.
    """
    if dt is None:
        dt = cfl_dt(U0.layout, params, config)
    sample_every = max(1, round(config.sample_interval / dt))
    n_steps = round(config.t_max / dt)

    t = 0.0
    U = U0
    if observer is not None:
        observer(t, U)
    for i in range(n_steps):
        if i >= config.max_steps:
            raise StepLimitExceeded(f"{config.max_steps} steps at t={t:.6g}")
        try:
            U = step(U, dt, params)
        except DensityUnderflow as exc:
            raise BlowUpDetected(t + dt, str(exc)) from exc
        t = (i + 1) * dt
        if observer is not None and ((i + 1) % sample_every == 0 or i + 1 == n_steps):
            observer(t, U)
    return U
