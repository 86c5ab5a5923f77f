import cmath
import math

import numpy as np
import pytest

from omfields import (
    BistableAmbiguity,
    DivisionByZeroDrive,
    DriveConfig,
    ResonanceMismatch,
    SystemParams,
    ValidationError,
    combined_fields,
    normalized_outputs,
    output_fields,
    response_coefficients,
    steady_state,
    susceptibility,
)
from omfields.response import linearized_residuals, resonant_fields
from reference import bare_fixed_point, reference_outputs

# frozen from reference.reference_outputs at G = 2pi x 1.5 MHz, delta = omega_q = Delta = omega_m
T_P = -0.7381609937750118 - 0.00549580391893994j
T_F = 0.0012195259226342413 - 0.01595981458060159j
T_U = -23.487368941752 - 0.9342866662197906j
T_L = 0.2073194068478211 - 2.7131684787022707j


def test_resonant_values_frozen(params, G):
    wm = params.omega_m
    out = normalized_outputs(params, G, wm, wm)
    for got, want in zip((out.t_p, out.t_f, out.t_u, out.t_l), (T_P, T_F, T_U, T_L)):
        assert abs(got - want) <= 1e-12 * abs(want)


@pytest.mark.parametrize(
    "delta_shift, wq_shift, phi_p, phi_m, G_scale",
    [
        (0.0, 0.0, 0.0, 0.0, 1.0),
        (3e5, -2e5, 0.7, -1.1, 1.0),
        (-1e6, 1e6, 2.5, 0.3, 0.2),
        (0.0, 0.0, -3.0, 3.0, 10.0),
        (5e7, 5e7, 1.0, 1.0, 4.0),
    ],
)
def test_matches_linear_solve(params, G, delta_shift, wq_shift, phi_p, phi_m, G_scale):
    wm = params.omega_m
    Gc = G * G_scale * cmath.exp(0.3j)
    d, wq = wm + 2 * math.pi * delta_shift, wm + 2 * math.pi * wq_shift
    out = normalized_outputs(params, Gc, wm, d, wq, phi_p, phi_m)
    ref = reference_outputs(wm, params.gamma_m, params.gamma_a0, params.gamma_ae, wm, Gc, d, wq, phi_p, phi_m)
    for got, want in zip((out.t_p, out.t_f, out.t_u, out.t_l), ref):
        assert abs(got - want) <= 1e-9 * abs(want)


def test_decoupled_cavity(params):
    wm = params.omega_m
    delta = 0.97 * wm
    out = normalized_outputs(params, 0.0, wm, delta)
    assert out.t_p == pytest.approx(2 * params.gamma_ae / (params.gamma_a + 1j * (wm - delta)) - 1, rel=1e-14)
    assert out.t_f == 0 and out.t_u == 0 and out.t_l == 0


def test_susceptibility_vectorizes(params, G):
    w = np.linspace(0.99, 1.01, 7) * params.omega_m
    arr = susceptibility(params, G, params.omega_m, w)
    assert arr.shape == w.shape
    for x, y in zip(w, arr):
        assert susceptibility(params, G, params.omega_m, x) == pytest.approx(y, rel=1e-15)


def test_susceptibility_bare_resonator(params):
    w = 0.999 * params.omega_m
    chi = susceptibility(params, 0.0, params.omega_m, w)
    wm = params.omega_m
    assert chi == pytest.approx(-wm / (wm**2 - w**2 - 1j * params.gamma_m * w), rel=1e-14)


def test_effective_steady_state(params, G):
    d = DriveConfig(eps_c=3.0, Delta=params.omega_m)
    ss = steady_state(params, d, G=G)
    assert ss.G == G
    assert ss.alpha0 == pytest.approx(3.0 / (params.gamma_a + 1j * params.omega_m))


def test_effective_from_bare_coupling(params):
    p = SystemParams(**{**params.__dict__, "g": 100.0})
    ss = steady_state(p, DriveConfig(eps_c=2.0, Delta=1.0))
    assert ss.G == pytest.approx(100.0 * ss.alpha0)
    assert ss.q0 == pytest.approx(-(100.0 / p.omega_m) * abs(ss.alpha0) ** 2)


def test_bare_steady_state_matches_fixed_point(params):
    p = SystemParams(**{**params.__dict__, "g": 50.0})
    eps_c = 1e5 * params.gamma_a
    Delta_a = 1.1 * params.omega_m
    ss = steady_state(p, DriveConfig(eps_c=eps_c), "bare", Delta_a=Delta_a)
    q0 = bare_fixed_point(p.omega_m, p.gamma_a, p.g, eps_c, Delta_a)
    assert ss.q0 == pytest.approx(q0, rel=1e-12)
    assert ss.Delta == pytest.approx(Delta_a + p.g * q0, rel=1e-12)


def _bistable():
    # y (1 + (5 + y)^2) + 6 = 0 has three real roots
    p = SystemParams(omega_m=10.0, gamma_m=0.01, gamma_a0=0.5, gamma_ae=0.5, g=1.0)
    return p, DriveConfig(eps_c=math.sqrt(60.0))


def test_bistable_region_raises():
    p, d = _bistable()
    with pytest.raises(BistableAmbiguity) as err:
        steady_state(p, d, "bare", Delta_a=5.0)
    assert len(err.value.roots) == 3


def test_bistable_branch_selection():
    p, d = _bistable()
    shifts = []
    for branch in range(3):
        ss = steady_state(p, d, "bare", Delta_a=5.0, branch=branch)
        y = ss.Delta - 5.0
        assert abs(y * (1 + (5 + y) ** 2) + 6) < 1e-12
        shifts.append(y)
    assert shifts == sorted(shifts)


def test_zero_bare_coupling():
    p = SystemParams(omega_m=10.0, gamma_m=0.01, gamma_a0=0.5, gamma_ae=0.5, g=0.0)
    ss = steady_state(p, DriveConfig(eps_c=2.0), "bare", Delta_a=3.0)
    assert ss.Delta == 3.0 and ss.q0 == 0.0 and ss.G == 0


def test_bare_mode_needs_inputs(params):
    with pytest.raises(ValidationError):
        steady_state(params, DriveConfig(), "bare", Delta_a=1.0)


def test_zero_drive_normalization(params, G):
    d = DriveConfig(eps_p=1e-3, eps_m=0.0, delta=params.omega_m, omega_q=params.omega_m, Delta=params.omega_m)
    with pytest.raises(DivisionByZeroDrive):
        output_fields(params, response_coefficients(params, G, d), d)


def test_combining_off_resonance_rejected(params, G):
    out = normalized_outputs(params, G, params.omega_m, params.omega_m, 0.99 * params.omega_m)
    with pytest.raises(ResonanceMismatch):
        combined_fields(out, 0.01, 0.0)


def test_negative_eta_rejected(params, G):
    out = normalized_outputs(params, G, params.omega_m, params.omega_m)
    with pytest.raises(ValidationError):
        combined_fields(out, -0.1, 0.0)


def test_combined_rephasing_matches_direct(params, G):
    wm = params.omega_m
    phi = 1.3
    direct = combined_fields(normalized_outputs(params, G, wm, wm, phi_p=phi), 0.02, phi)
    rephased = combined_fields(normalized_outputs(params, G, wm, wm), 0.02, phi)
    assert rephased.t_fl == pytest.approx(direct.t_fl, rel=1e-13)
    assert rephased.t_pu == pytest.approx(direct.t_pu, rel=1e-13)


def test_residuals_at_operating_point(params, G):
    wm = params.omega_m
    d = DriveConfig(eps_p=1e-3, eps_m=2e-5, phi_p=0.4, phi_m=-0.2, delta=wm, omega_q=1.001 * wm, Delta=wm)
    res = linearized_residuals(params, G, d, response_coefficients(params, G, d))
    assert max(res.values()) <= 1e-12


def test_theta_is_phase_of_t_pu(params, G):
    f = resonant_fields(params, G, params.omega_m, params.omega_m, 0.01, math.pi)
    assert f.theta == pytest.approx(cmath.phase(f.t_pu))
