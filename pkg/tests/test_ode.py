import numpy as np
import pytest

from vaxgame import (
    ModelParams,
    OdeState,
    closed_form,
    fc,
    find_equilibrium,
    fr,
    integrate,
    rhs,
    varrho,
    vfc1,
    vfc2,
)
from vaxgame.errors import IndicatorNonstationary


def ratios(params):
    return params.lam / (params.r + params.b + params.d_e), params.b / params.nu


def test_disease_free_face_invariant(left_params):
    g = rhs(OdeState(0.0, 0.3, 0.5), left_params, fc(2.0))
    assert g[0] == 0.0


def test_field_vanishes_at_no_vaccination_level(left_params):
    rho, _ = ratios(left_params)
    point = OdeState(1.0 - 1.0 / rho, 0.0, 0.1)
    g = rhs(point, left_params, fc(0.5))
    assert abs(g[0]) < 1e-14
    assert abs(g[1]) < 1e-14


def test_field_vanishes_at_coexistence(left_params):
    # saturated acceptance: q = 1 at the point, by a large behaviour parameter
    rho, mu = ratios(left_params)
    theta_e = 1.0 - 1.0 / rho - 1.0 / (mu * rho)
    psi_e = 1.0 / (mu * rho)
    eta_hat = (left_params.b - left_params.d) / varrho(theta_e, psi_e, left_params)
    g = rhs(OdeState(theta_e, psi_e, eta_hat), left_params, fc(3.0))
    assert np.linalg.norm(g[:2]) < 1e-6
    assert abs(g[2]) < 1e-12


def test_eta_nullcline_at_equilibria(left_params):
    for pol in (fc(0.5), fc(3.0), vfc1(4.0)):
        att = closed_form(left_params, pol)
        assert att.eta_hat == pytest.approx(
            (left_params.b - left_params.d - left_params.d_e * att.theta_hat)
            / varrho(att.theta_hat, att.psi_hat, left_params),
            rel=1e-12,
        )


def test_integrate_reaches_no_vaccination_level(left_params):
    att = closed_form(left_params, fc(0.5))
    path = integrate(OdeState(0.21, 0.001, 1.0), left_params, fc(0.5), horizon=1e4)
    assert abs(path.endpoint.theta - att.theta_hat) <= 1e-4
    assert abs(path.endpoint.psi - att.psi_hat) <= 1e-4
    assert path.settled


def test_integrate_reaches_disease_free(right_params):
    # acceptance at the endpoint stays below 1 for this behaviour parameter
    rho, mu = ratios(right_params)
    assert mu * rho < 1.5 < mu + 1.0
    path = integrate(OdeState(0.3, 0.01, 1.0), right_params, fc(1.5), horizon=1e4)
    assert abs(path.endpoint.theta - 0.0) <= 1e-4
    assert abs(path.endpoint.psi - (1.0 - mu / 1.5)) <= 1e-4


def test_integrate_saturated_disease_free(right_params):
    # beyond the clamp the vaccinated share settles at 1/(mu+1) instead
    _, mu = ratios(right_params)
    path = integrate(OdeState(0.3, 0.01, 1.0), right_params, fc(2.0), horizon=1e4)
    assert abs(path.endpoint.psi - 1.0 / (mu + 1.0)) <= 1e-4


def test_disease_free_face_stays_invariant(left_params):
    path = integrate(OdeState(0.0, 0.25, 1.0), left_params, fc(2.5), horizon=50.0)
    assert np.all(path.states[:, 0] == 0.0)


def test_simplex_forward_invariance(left_params):
    rng = np.random.default_rng(8)
    for _ in range(5):
        theta = rng.uniform(0, 1)
        psi = rng.uniform(0, 1 - theta)
        path = integrate(
            OdeState(theta, psi, rng.uniform(0.05, 2.0)),
            left_params,
            fr(rng.uniform(0, 6)),
            horizon=200.0,
        )
        assert path.states[:, 0].min() >= -1e-10
        assert path.states[:, 1].min() >= -1e-10
        assert (path.states[:, 0] + path.states[:, 1]).max() <= 1.0 + 1e-10


def test_find_equilibrium_coexistence(left_params):
    att = closed_form(left_params, fc(3.0))
    res = find_equilibrium(OdeState(0.3, 0.45, 0.1), left_params, fc(3.0))
    assert res.converged and res.residual < 1e-10
    assert res.state.theta == pytest.approx(att.theta_hat, abs=1e-9)
    assert res.state.psi == pytest.approx(att.psi_hat, abs=1e-9)


def test_find_equilibrium_origin_fixed():
    params = ModelParams(lam=1.0, r=1.0, nu=1.0, b=0.5, d=0.2)
    res = find_equilibrium(OdeState(0.0, 0.0, 0.3), params, fc(0.3))
    assert res.converged
    assert res.state.theta == 0.0 and res.state.psi == 0.0


def test_find_equilibrium_rejects_reachable_threshold():
    params = ModelParams(lam=4.0, r=1.0, nu=2.0, b=1.0, d=0.8)
    with pytest.raises(IndicatorNonstationary):
        find_equilibrium(OdeState(0.3, 0.2, 0.1), params, vfc2(6.0, 0.2))


def test_find_equilibrium_unreachable_threshold_is_fine():
    # Gamma above the endemic level: vigilance never triggers
    params = ModelParams(lam=4.0, r=1.0, nu=2.0, b=1.0, d=0.8)
    rho = 4.0 / 2.0
    res = find_equilibrium(OdeState(0.4, 0.05, 0.1), params, vfc2(6.0, 0.9))
    assert res.converged
    assert res.state.theta == pytest.approx(1.0 - 1.0 / rho, abs=1e-9)


def test_vfc2_integration_oscillates_then_slides():
    params = ModelParams(lam=4.0, r=1.0, nu=2.0, b=1.0, d=0.8)
    pol = vfc2(6.0, 0.2)
    path = integrate(
        OdeState(0.25, 0.1, 0.1), params, pol, horizon=30.0, stop_at_equilibrium=False,
        rtol=1e-9, atol=1e-11,
    )
    assert path.zeno_truncated
    # crossings accumulate toward the sliding centre (Gamma, 1-1/rho-Gamma)
    from vaxgame import count_crossings

    assert count_crossings(path.states[:, 0], 0.2) >= 10
    assert path.endpoint.theta == pytest.approx(0.2, abs=1e-6)
    assert path.endpoint.psi == pytest.approx(0.3, abs=0.01)
