import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flrwc import geometry as geo
from flrwc.errors import UnsupportedChart
from flrwc.models import ScaleFactorModel

RAD = ScaleFactorModel.power_law(2.0)


def test_metric_examples():
    assert geo.metric(RAD, 1.0, [1, 0, 0, 0], [1, 0, 0, 0]) == -1.0
    assert geo.metric(RAD, 4.0, [0, 1, 0, 0], [0, 1, 0, 0]) == pytest.approx(4.0)
    assert geo.metric(RAD, 1.0, [1, 1, 0, 0], [1, -1, 0, 0]) == pytest.approx(-2.0)


def test_christoffel_examples():
    G = geo.christoffels(RAD, 1.0)
    assert G[0, 1, 1] == pytest.approx(0.5)
    assert G[1, 0, 1] == pytest.approx(0.5)
    assert G[1, 1, 0] == pytest.approx(0.5)
    assert G[1, 2, 3] == 0.0 and G[2, 1, 3] == 0.0
    assert np.allclose(G, np.swapaxes(G, 1, 2), rtol=0, atol=0)


def test_curved_chart_rejected():
    m = ScaleFactorModel.power_law(2.0, kappa=1.0)
    for call in (lambda: geo.christoffels(m, 0.5), lambda: geo.riemann(m, 0.5),
                 lambda: geo.metric(m, 0.5, [1, 0, 0, 0], [1, 0, 0, 0])):
        with pytest.raises(UnsupportedChart):
            call()


models = st.builds(
    lambda fam, eps: ScaleFactorModel.power_law(eps) if fam else ScaleFactorModel.log_corrected(eps),
    st.booleans(),
    st.floats(0.3, 4.0),
)
vectors = st.lists(st.floats(-2.0, 2.0), min_size=4, max_size=4).map(np.array)


@settings(max_examples=20, deadline=None)
@given(models, st.floats(0.05, 0.45))
def test_finite_difference_oracle(m, t):
    G, Gfd = geo.christoffels(m, t), geo.fd_christoffels(m, t)
    assert np.allclose(G, Gfd, rtol=1e-5, atol=1e-5 * np.max(np.abs(G)))
    R, Rfd = geo.riemann(m, t), geo.fd_riemann(m, t)
    assert np.allclose(R, Rfd, rtol=1e-5, atol=1e-5 * np.max(np.abs(R)))


@settings(max_examples=50, deadline=None)
@given(models, st.floats(0.05, 0.45), vectors, vectors, vectors)
def test_curvature_operator_identities(m, t, u, v, w):
    Rvu = geo.curvature_operator(m, t, u, v)
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    scale = max(1.0, np.max(np.abs(geo.riemann(m, t))))
    assert abs(geo.metric(m, t, Rvu, u)) <= 1e-10 * scale * max(1.0, nv * nu**3) * (1 + m.a(t) ** 2)
    Rwu = geo.curvature_operator(m, t, u, w)
    lhs, rhs = geo.metric(m, t, Rvu, w), geo.metric(m, t, Rwu, v)
    assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-10 * scale * (1 + np.linalg.norm(w)) ** 4 * (1 + nu) ** 4)


def test_riemann_symmetries():
    m = ScaleFactorModel.log_corrected(1.5)
    t = 0.2
    R = geo.riemann(m, t)
    g = geo.metric_tensor(m, t)
    Rl = np.einsum("ar,rsmn->asmn", g, R)
    assert np.allclose(Rl, -np.swapaxes(Rl, 2, 3), atol=1e-12)
    assert np.allclose(Rl, -np.swapaxes(Rl, 0, 1), atol=1e-12)
    assert np.allclose(Rl, np.transpose(Rl, (2, 3, 0, 1)), atol=1e-12)
    bianchi = R + np.transpose(R, (0, 2, 3, 1)) + np.transpose(R, (0, 3, 1, 2))
    assert np.allclose(bianchi, 0.0, atol=1e-12)


def test_self_deviation_is_zero():
    u = np.array([1.3, 0.4, 0.1, 0.0])
    assert np.allclose(geo.curvature_operator(RAD, 0.3, u, u), 0.0, atol=1e-14)


@pytest.mark.parametrize("eps", [0.5, 1.5, 2.0])
def test_comoving_deviation(eps):
    m = ScaleFactorModel.power_law(eps)
    t = 0.6
    a, _, dda = m.derivatives(t)
    R = geo.curvature_operator(m, t, [1.0, 0, 0, 0], [0, 1.0 / a, 0, 0])
    assert R[1] == pytest.approx(-(dda / a) / a, rel=1e-12)
    assert np.allclose(np.delete(R, 1), 0.0, atol=1e-15)


def test_ricci_examples():
    assert geo.ricci_along(RAD, 1.0, 1.0, geo.NormClass.NULL) == pytest.approx(-1.0)
    assert geo.ricci_along(RAD, 1.0, 1.0, geo.NormClass.TIMELIKE) == pytest.approx(-1.75)
    assert geo.ricci_along(RAD, 1.0, 1e-300, geo.NormClass.TIMELIKE) == pytest.approx(-0.75)


@settings(max_examples=40, deadline=None)
@given(models, st.floats(0.01, 0.45), st.floats(0.1, 5.0), st.sampled_from([-1.0, 0.0, 1.0]))
def test_ricci_timelike_minus_null(m, t, C, kappa):
    m = ScaleFactorModel(m.family, epsilon=m.epsilon, kappa=kappa, t1=m.t1)
    a, _, dda = m.derivatives(t)
    diff = geo.ricci_along(m, t, C, geo.NormClass.TIMELIKE) - geo.ricci_along(m, t, C, geo.NormClass.NULL)
    assert diff == pytest.approx(3 * dda / a, rel=1e-12, abs=1e-12 * abs(geo.ricci_along(m, t, C, "null")))


def test_ricci_matches_contracted_riemann():
    m = ScaleFactorModel.power_law(1.5)
    t, C = 0.4, 2.0
    a = m.a(t)
    u = np.array([np.sqrt(C + a * a) / a, np.sqrt(C) / a**2, 0, 0])
    R = geo.riemann(m, t)
    ric = np.einsum("rsrn->sn", R)
    assert -u @ ric @ u == pytest.approx(geo.ricci_along(m, t, C, "timelike"), rel=1e-12)
