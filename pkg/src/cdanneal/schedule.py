"""Annealing schedule: the interpolation profile, its rate, and the time grid.

The default profile is the nested-sine form
``lam(t) = sin^2[(pi/2) sin^2(pi t / 2T)]``, which rises monotonically from 0
to 1 with zero rate at both endpoints, so rate-proportional driving terms
switch off exactly at the start and end of the protocol.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .errors import ParameterError

_TIME_SLACK = 1e-9  # relative slack for endpoint rounding in t checks


class GridPoint(NamedTuple):
    t: float
    lam: float
    lam_dot: float


@dataclass(frozen=True)
class Schedule:
    """Total time, step count, and profile choice for one digitized evolution.

    ``midpoint=True`` evaluates step coefficients at the interval midpoint
    instead of the right endpoint; it is off by default.
    """

    total_time: float = 1.0
    steps: int = 20
    form: str = "sin2-sin2"
    midpoint: bool = False

    def __post_init__(self):
        if self.total_time <= 0.0:
            raise ParameterError(f"total time must be positive, got {self.total_time}")
        if self.steps < 1:
            raise ParameterError(f"step count must be >= 1, got {self.steps}")
        if self.form != "sin2-sin2":
            raise ParameterError(f"unknown schedule form {self.form!r}")

    @property
    def dt(self) -> float:
        return self.total_time / self.steps

    def _check_time(self, t: float) -> float:
        slack = _TIME_SLACK * self.total_time
        if not -slack <= t <= self.total_time + slack:
            raise ParameterError(
                f"time {t} outside [0, {self.total_time}]"
            )
        return min(max(t, 0.0), self.total_time)

    def lam(self, t: float) -> float:
        """Interpolation value in [0, 1]; 0 at t=0 and 1 at t=T."""
        t = self._check_time(t)
        inner = math.sin(math.pi * t / (2.0 * self.total_time)) ** 2
        return math.sin(0.5 * math.pi * inner) ** 2

    def lam_dot(self, t: float) -> float:
        """Analytic time derivative of ``lam``; vanishes at both endpoints."""
        t = self._check_time(t)
        v = math.pi * t / (2.0 * self.total_time)
        u = 0.5 * math.pi * math.sin(v) ** 2
        return (
            math.pi**2 / (4.0 * self.total_time) * math.sin(2.0 * u) * math.sin(2.0 * v)
        )

    def grid(self) -> tuple[GridPoint, ...]:
        """Per-step coefficient evaluation points t_k = k*dt for k = 1..M.

        Each point carries (t, lam, lam_dot).  With ``midpoint`` set the
        evaluation shifts to t_k - dt/2 while steps still span dt.
        """
        dt = self.dt
        points = []
        for k in range(1, self.steps + 1):
            t_eval = k * dt - (0.5 * dt if self.midpoint else 0.0)
            t_eval = min(t_eval, self.total_time)
            points.append(GridPoint(t_eval, self.lam(t_eval), self.lam_dot(t_eval)))
        return tuple(points)
