import math

import numpy as np
import pytest

from cdanneal.errors import ParameterError
from cdanneal.schedule import Schedule


def test_endpoint_values():
    sched = Schedule(1.0, 20)
    assert sched.lam(0.0) == 0.0
    assert sched.lam(1.0) == pytest.approx(1.0, abs=1e-15)
    assert sched.lam(0.5) == pytest.approx(0.5, abs=1e-12)


def test_endpoint_rates_vanish():
    for total in (1.0, 2.5, 50.0):
        sched = Schedule(total, 10)
        assert sched.lam_dot(0.0) == pytest.approx(0.0, abs=1e-12)
        assert sched.lam_dot(total) == pytest.approx(0.0, abs=1e-12)


def test_midpoint_rate_analytic():
    # Frozen from the chain rule at t = T/2, T = 1: pi^2 / 4.
    sched = Schedule(1.0, 20)
    assert sched.lam_dot(0.5) == pytest.approx(math.pi**2 / 4.0, abs=1e-12)


def test_rate_matches_finite_differences():
    sched = Schedule(1.0, 20)
    rng = np.random.default_rng(0)
    step = 1e-6
    for t in rng.uniform(step, 1.0 - step, size=100):
        numeric = (sched.lam(t + step) - sched.lam(t - step)) / (2.0 * step)
        assert sched.lam_dot(t) == pytest.approx(numeric, abs=1e-7)


def test_monotone_profile():
    sched = Schedule(1.0, 20)
    values = [sched.lam(t) for t in np.linspace(0.0, 1.0, 501)]
    assert all(b >= a - 1e-15 for a, b in zip(values, values[1:]))
    assert all(0.0 <= v <= 1.0 for v in values)


def test_grid_default_protocol():
    grid = Schedule(1.0, 20).grid()
    assert len(grid) == 20
    assert [p.t for p in grid] == pytest.approx(
        [0.05 * k for k in range(1, 21)], abs=1e-12
    )
    lams = [p.lam for p in grid]
    assert all(b >= a for a, b in zip(lams, lams[1:]))
    assert lams[-1] == pytest.approx(1.0, abs=1e-15)
    assert grid[-1].lam_dot == pytest.approx(0.0, abs=1e-12)


def test_grid_single_step():
    (point,) = Schedule(1.0, 1).grid()
    assert point.t == 1.0
    assert point.lam == pytest.approx(1.0, abs=1e-15)
    assert point.lam_dot == pytest.approx(0.0, abs=1e-12)


def test_rate_integrates_to_unity():
    sched = Schedule(1.0, 400)
    total = sum(p.lam_dot for p in sched.grid()) * sched.dt
    assert total == pytest.approx(1.0, abs=1e-4)


def test_midpoint_option():
    sched = Schedule(1.0, 4, midpoint=True)
    assert [p.t for p in sched.grid()] == pytest.approx([0.125, 0.375, 0.625, 0.875])


def test_domain_validation():
    sched = Schedule(1.0, 20)
    with pytest.raises(ParameterError):
        sched.lam(-0.1)
    with pytest.raises(ParameterError):
        sched.lam(1.1)
    with pytest.raises(ParameterError):
        sched.lam_dot(2.0)
    with pytest.raises(ParameterError):
        Schedule(1.0, 0)
    with pytest.raises(ParameterError):
        Schedule(0.0, 5)
    with pytest.raises(ParameterError):
        Schedule(1.0, 5, form="linear")
