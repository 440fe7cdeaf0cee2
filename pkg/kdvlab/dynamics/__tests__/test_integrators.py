import numpy as np
import pytest

from kdvlab.dynamics.integrators import (
    ETDRK4Integrator,
    IFRK4Integrator,
    Scheme,
    make_integrator,
    phi_functions,
)


def test_phi_functions_at_zero():
    phi1, phi2 = phi_functions(0.0)
    assert phi1 == pytest.approx(1.0, abs=1e-14)
    assert phi2 == pytest.approx(0.5, abs=1e-14)


def test_phi_functions_match_closed_form():
    z = np.array([1.0, -2.5, 3j, -40.0 + 7j])
    phi1, phi2 = phi_functions(z)
    np.testing.assert_allclose(phi1, (np.exp(z) - 1) / z, rtol=1e-12)
    np.testing.assert_allclose(phi2, (np.exp(z) - 1 - z) / z**2, rtol=1e-12)


def test_etdrk4_coefficients_reduce_to_rk4_weights():
    h = 0.1
    integrator = ETDRK4Integrator(np.array([0.0, -2.0]), h)
    for coeff in (integrator.coeff_f0, integrator.coeff_f1, integrator.coeff_f2, integrator.coeff_f3):
        np.testing.assert_allclose(coeff.imag, 0.0, atol=1e-14)
    assert integrator.coeff_f0[0] == pytest.approx(h / 2, rel=1e-13)
    for coeff in (integrator.coeff_f1, integrator.coeff_f2, integrator.coeff_f3):
        assert coeff[0] == pytest.approx(h / 6, rel=1e-13)
    z = -2.0 * h
    assert integrator.coeff_f0[1] == pytest.approx(h * (np.exp(z / 2) - 1) / z, rel=1e-13)


@pytest.mark.parametrize("scheme", list(Scheme))
def test_linear_part_alone_is_exact(scheme):
    linear = np.array([-3.0, 2j, -0.5 + 10j])
    integrator = make_integrator(scheme, linear, 0.1)
    u = integrator.forward_integrate(np.ones(3, dtype=complex), lambda x: np.zeros_like(x), num_step=10)
    np.testing.assert_allclose(u, np.exp(linear), rtol=1e-13)


@pytest.mark.parametrize("cls", [ETDRK4Integrator, IFRK4Integrator])
def test_fourth_order_convergence(cls):
    # u' = L u - u^2 with L stiff and oscillatory; reference from a much finer step
    linear = np.array([-20.0 + 5j, -1.0 + 30j])

    def nonlinear(u):
        return -(u**2)

    def solve(dt):
        return cls(linear, dt).forward_integrate(np.array([0.8, 0.5], dtype=complex), nonlinear, int(round(1.0 / dt)))

    reference = solve(1e-4)
    errors = [np.max(np.abs(solve(dt) - reference)) for dt in (0.02, 0.01)]
    assert errors[0] / errors[1] > 8.0


def test_make_integrator_dispatches_on_scheme():
    linear = np.zeros(4)
    assert isinstance(make_integrator(Scheme.ETDRK4, linear, 0.1), ETDRK4Integrator)
    assert isinstance(make_integrator("integrating-factor-rk4", linear, 0.1), IFRK4Integrator)
