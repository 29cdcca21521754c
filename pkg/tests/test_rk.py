import numpy as np
import pytest

from flrwc import rk
from flrwc.errors import StepFailure


def harmonic(x, y):
    return np.array([y[1], -y[0]])


@pytest.mark.parametrize("x1", [10.0, -10.0])
def test_harmonic_oscillator(x1):
    sol = rk.solve(harmonic, 0.0, [0.0, 1.0], x1, rtol=1e-12, atol=1e-14)
    x = np.linspace(0.0, x1, 301)
    assert np.max(np.abs(sol(x)[:, 0] - np.sin(x))) < 1e-10
    assert np.max(np.abs(sol.derivative(x)[:, 0] - np.cos(x))) < 1e-9


def test_dense_output_hits_nodes():
    sol = rk.solve(harmonic, 0.0, [0.0, 1.0], 3.0, rtol=1e-10)
    assert np.allclose(sol(sol.x), sol.y, rtol=0, atol=1e-15)
    assert sol.n_steps == len(sol.x) - 1


def test_error_scales_with_tolerance():
    errs = []
    for tol in (1e-6, 1e-9):
        sol = rk.solve(harmonic, 0.0, [0.0, 1.0], 20.0, rtol=tol, atol=tol)
        errs.append(abs(sol(20.0)[0] - np.sin(20.0)))
    assert errs[1] < 1e-2 * errs[0]


def test_initial_step_adapts_to_scale():
    # a solution living on scale 1e-12 must not be resolved with a unit step
    sol = rk.solve(lambda x, y: -1e12 * y, 0.0, [1.0], 1e-11, rtol=1e-10, atol=1e-14)
    assert sol(1e-11)[0] == pytest.approx(np.exp(-10.0), rel=1e-8)


def test_step_failure():
    with pytest.raises(StepFailure):
        rk.solve(lambda x, y: np.array([1.0 / (1.0 - x)]), 0.0, [0.0], 2.0, rtol=1e-10, max_steps=2000)


def test_dense_control_bounds_interpolation_error_on_quadratures():
    def fun(x, y):
        return np.array([np.exp(2 * x)])

    x = np.linspace(-14, 2, 3001)
    exact = 0.5 * np.exp(2 * x)
    errs = {}
    for flag in (False, True):
        sol = rk.solve(fun, -14.0, [0.5 * np.exp(-28.0)], 2.0, rtol=1e-10, atol=1e-30, dense_control=flag)
        errs[flag] = np.max(np.abs(sol(x)[:, 0] / exact - 1))
    assert errs[True] < 1e-8
    assert errs[True] < errs[False]
