"""SSP Runge-Kutta stepping, stability-constrained beta and CFL control.

The kernel ratio beta = alpha * c_max * dt must stay at or below a
k-dependent bound for the scheme to be stable for every time step; the
defaults below are those bounds in 1-D and the halved values used for
two-dimensional runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidOrderError, InvalidParameterError, InvalidSpeedError
from .kernel import BETA_MAX

#: Default kernel ratio per order and dimension.
BETA_DEFAULT = {
    1: {1: 2.0, 2: 1.0, 3: 1.243},
    2: {1: 1.0, 2: 0.5, 3: 0.6},
}


def select_beta(order, dimension):
    """Stable default beta for the given partial-sum order and dimension."""
    if order not in (1, 2, 3):
        raise InvalidOrderError(f"unsupported order {order}")
    if dimension not in (1, 2):
        raise InvalidOrderError(f"unsupported dimension {dimension}")
    return BETA_DEFAULT[dimension][order]


def validate_beta(beta, order):
    if beta <= 0.0 or beta > BETA_MAX[order] + 1e-12:
        raise InvalidParameterError(
            f"beta={beta} outside (0, {BETA_MAX[order]}] for order {order}"
        )
    return float(beta)


@dataclass
class TimeController:
    """Tracks t, recomputes dt from the current wave speeds, clamps at T."""

    cfl: float
    t_final: float
    t: float = 0.0
    dt: float = 0.0
    c_max: tuple = ()

    def next_dt(self, spacings, speeds):
        """CFL step dt = CFL / sum_d(c_d / h_d), clamped to land on T.

        Directional rates are accumulated (not maximized): in several
        dimensions the diagonal transport rate is their sum, and the
        benchmark tables are only reproduced with the accumulated form.
        For one dimension the two conventions coincide.
        """
        self.c_max = tuple(speeds)
        rates = []
        for h, c in zip(spacings, speeds):
            if c <= 0.0:
                raise InvalidSpeedError(f"nonpositive wave speed {c}")
            rates.append(c / h)
        dt = self.cfl / sum(rates)
        if self.t + dt > self.t_final:
            dt = self.t_final - self.t
        self.dt = dt
        return dt

    def advance(self):
        self.t += self.dt

    @property
    def done(self):
        return self.t >= self.t_final - 1e-13 * max(1.0, abs(self.t_final))


def cfl_dt(cfl, spacings, speeds, t=0.0, t_final=np.inf):
    """One-shot version of TimeController.next_dt."""
    tc = TimeController(cfl=cfl, t_final=t_final, t=t)
    return tc.next_dt(spacings, speeds)


@dataclass(frozen=True)
class RKScheme:
    """Explicit SSP scheme as convex combinations of Euler substeps.

    Each stage is  y <- a*y_n + (1-a)*(y_prev + dt*f(y_prev))  evaluated at
    the stage time offsets in ``stage_times`` (used only for time-dependent
    boundary data).
    """

    order: int
    combos: tuple  # (a_coefficient, stage_time_offset) per stage

    @classmethod
    def of_order(cls, order):
        if order == 1:
            return cls(1, ((0.0, 1.0),))
        if order == 2:
            return cls(2, ((0.0, 1.0), (0.5, 1.0)))
        if order == 3:
            return cls(3, ((0.0, 1.0), (0.75, 0.5), (1.0 / 3.0, 1.0)))
        raise InvalidOrderError(f"unsupported RK order {order}")


def ssp_rk_step(state, rhs, scheme, dt, t=0.0, post_stage=None):
    """Advance one step; ``rhs(y)`` is re-evaluated at every stage.

    ``post_stage(y, t_stage)`` may enforce boundary values on each stage
    result in place.
    """
    y_n = state
    y = state
    for a, ct in scheme.combos:
        y = a * y_n + (1.0 - a) * (y + dt * rhs(y))
        if post_stage is not None:
            y = post_stage(y, t + ct * dt)
    return y
