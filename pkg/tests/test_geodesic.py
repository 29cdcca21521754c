import numpy as np
import pytest

from flrwc import geometry as geo
from flrwc.errors import DomainError, UnsupportedChart
from flrwc.geodesic import (
    GeodesicSpec,
    four_velocity,
    integrate_geodesic,
    radiation_closed_forms,
    vary_geodesic,
)
from flrwc.models import ScaleFactorModel

RAD = ScaleFactorModel.power_law(2.0)


@pytest.fixture(scope="module")
def rad_path():
    return integrate_geodesic(RAD, GeodesicSpec.canonical("timelike", 1.0, 1e-6, 10.0))


def test_closed_form_values():
    cf = radiation_closed_forms(1.0, 1.0)
    assert cf["tau"] == pytest.approx(0.532839, abs=1e-6)
    assert cf["x1"] == pytest.approx(1.762747, abs=1e-6)
    assert cf["h3"] == 0.0
    assert radiation_closed_forms(0.0, 1.0)["h3"] == pytest.approx(-1.762747, abs=1e-6)
    assert radiation_closed_forms(0.0)["tau"] == 0.0
    with pytest.raises(DomainError):
        radiation_closed_forms(-1.0)


def test_radiation_tau_and_x(rad_path):
    t = np.logspace(-6, 1, 500)
    cf = radiation_closed_forms(t)
    assert rad_path.tau_anchored and rad_path.x_anchored
    assert np.max(np.abs(rad_path.tau_at(t) - cf["tau"])) < 1e-8
    _, x, _ = rad_path.state_at(t)
    assert np.max(np.abs(x[:, 0] - cf["x1"])) < 1e-8


def test_path_invariants(rad_path):
    t = rad_path.t
    a = RAD.a(t)
    u = rad_path.u
    assert np.allclose(u[:, 0], np.sqrt(1 + a * a) / a, rtol=1e-9, atol=0)
    assert np.allclose(a * a * u[:, 1], 1.0, rtol=1e-9)
    norm = -u[:, 0] ** 2 + a * a * np.sum(u[:, 1:] ** 2, axis=1)
    assert np.max(np.abs(norm + 1.0)) < 1e-9
    assert np.all(np.diff(rad_path.tau) > 0)


def test_null_power_law_eps1():
    m = ScaleFactorModel.power_law(1.0)
    path = integrate_geodesic(m, GeodesicSpec.canonical("null", 1.0, 1e-6, 5.0), atol=1e-20)
    t = np.logspace(-6, np.log10(5.0), 200)
    assert np.allclose(path.tau_at(t), t * t / 2, rtol=1e-8, atol=0)
    u = four_velocity(m, path.spec, t)
    assert np.max(np.abs(-u[:, 0] ** 2 + t * t * u[:, 1] ** 2)) < 1e-9 * np.max(u[:, 0] ** 2)


def test_general_direction_and_offset():
    spec = GeodesicSpec("timelike", (0.3, -0.4, 1.2), 1e-4, 2.0, Di=(1.0, 2.0, 3.0))
    path = integrate_geodesic(ScaleFactorModel.power_law(1.5), spec)
    _, x, u = path.state_at(np.array([0.1, 1.0]))
    a = ScaleFactorModel.power_law(1.5).a(np.array([0.1, 1.0]))
    assert np.allclose(a[:, None] ** 2 * u[:, 1:], np.array(spec.Ci), rtol=1e-9)
    step = x[1] - x[0]
    assert np.allclose(np.cross(step, spec.Ci), 0.0, atol=1e-12)


def test_t_at_tau_inverts(rad_path):
    for t in (1e-4, 0.3, 7.0):
        assert rad_path.t_at_tau(float(rad_path.tau_at(t))) == pytest.approx(t, rel=1e-10)


def test_spec_validation():
    with pytest.raises(DomainError):
        GeodesicSpec("timelike", (0.0, 0.0, 0.0), 0.1, 1.0)
    with pytest.raises(DomainError):
        GeodesicSpec.canonical("timelike", 1.0, 1.0, 0.5)
    with pytest.raises(ValueError):
        GeodesicSpec.canonical("spacelike", 1.0, 0.1, 1.0)
    with pytest.raises(UnsupportedChart):
        integrate_geodesic(ScaleFactorModel.power_law(2.0, 1.0), GeodesicSpec.canonical("timelike", 1.0, 0.1, 0.9))


def test_tolerance_convergence():
    spec = GeodesicSpec.canonical("timelike", 1.0, 1e-6, 10.0)
    t = np.logspace(-6, 1, 400)
    ref = radiation_closed_forms(t)["tau"]
    errs = []
    for tol in (1e-6, 1e-6 / 16):
        path = integrate_geodesic(RAD, spec, rtol=tol, atol=1e-2 * tol)
        errs.append(np.max(np.abs(path.tau_at(t) - ref)))
    assert errs[1] * 4 <= errs[0]


def test_variation_zero_perturbation(rad_path):
    V = vary_geodesic(RAD, rad_path.spec, np.zeros(4), 1e-4, 1.0, [0.1, 0.2], path=rad_path)
    assert np.all(V == 0.0)


def test_transverse_variation_matches_h3(rad_path):
    t = np.array([0.2, 0.5, 0.8])
    a = RAD.a(1.0)
    V = vary_geodesic(RAD, rad_path.spec, [0, 0, 1.0 / a, 0], 1e-4, 1.0, rad_path.tau_at(t), path=rad_path)
    # J = h3 * E2 with E2 = (0, 0, 1/a, 0), D_tau J(t2) = E2 fixes the normalisation
    expected = radiation_closed_forms(t, 1.0)["h3"]
    assert np.allclose(V[:, 2], expected, rtol=1e-4)
    assert np.allclose(V[:, [0, 1, 3]], 0.0, atol=1e-10)


def test_metric_of_variation_direction(rad_path):
    tau, x, u = rad_path.state_at(1.0)
    assert geo.metric(RAD, 1.0, u, u) == pytest.approx(-1.0, abs=1e-12)
