import cmath
import math

import numpy as np
import pytest

from omfields import DriveConfig, SystemParams, ValidationError
from omfields.errors import IncommensurateWindow, NotConverged, Unstable
from omfields.oracle import (
    OdeState,
    Trajectory,
    bare_from_effective,
    extract_tones,
    fundamental,
    integrate,
    window_samples,
)
from omfields.response import steady_state
from reference import decoupled_exact, decoupled_rk4

# decoupled cavity: g = 0 leaves a driven linear ODE with a closed-form solution
CAV = SystemParams(omega_m=10.0, gamma_m=0.1, gamma_a0=0.6, gamma_ae=0.4, g=0.0)
DRIVE = DriveConfig(eps_c=2.0, eps_p=0.3, phi_p=0.5, delta=3.0)
PROBE = 0.3 * cmath.exp(-0.5j)


def _cavity_error(dt, t_end=4.0):
    traj = integrate(CAV, DRIVE, t_end, dt, Delta_a=1.5)
    # the run starts from the probe-free steady state, so only the probe transient remains
    start = 2.0 / (CAV.gamma_a + 1.5j)
    p = PROBE / (CAV.gamma_a + 1.5j - 3j)
    lam = CAV.gamma_a + 1.5j
    expected = start + p * cmath.exp(-3j * traj.t[-1]) - p * cmath.exp(-lam * traj.t[-1])
    return abs(traj.alpha[-1] - expected)


def test_rk4_matches_closed_form():
    assert _cavity_error(1e-3) < 1e-11


def test_rk4_is_fourth_order():
    e1, e2 = _cavity_error(8e-3), _cavity_error(4e-3)
    assert 12 < e1 / e2 < 20


def test_reference_rk4_agrees_with_exact():
    a = decoupled_rk4(1.0, 1.5, 2.0, PROBE, 3.0, 1e-3, 4000)
    assert abs(a - decoupled_exact(1.0, 1.5, 2.0, PROBE, 3.0, 4.0)) < 1e-11


def test_rk45_scheme():
    traj = integrate(CAV, DRIVE, 4.0, 1e-2, "rk45-adaptive", Delta_a=1.5)
    rk4 = integrate(CAV, DRIVE, 4.0, 1e-2, Delta_a=1.5)
    assert traj.t[-1] == pytest.approx(rk4.t[-1])
    assert abs(traj.alpha[-1] - rk4.alpha[-1]) < 1e-7


def test_mechanics_relax_to_static_shift():
    p = SystemParams(omega_m=10.0, gamma_m=2.0, gamma_a0=0.6, gamma_ae=0.4, g=0.5)
    d = DriveConfig(eps_c=2.0, eps_p=0.0)
    ss = steady_state(p, d, "bare", Delta_a=1.5)
    start = OdeState(0.0, 0.0, 0.0, 0.0)
    traj = integrate(p, d, 20.0, 1e-3, Delta_a=1.5, initial=start)
    assert traj.q[-1] == pytest.approx(ss.q0, rel=1e-8)
    assert traj.alpha[-1] == pytest.approx(ss.alpha0, rel=1e-8)


def test_stride_and_record_from():
    traj = integrate(CAV, DRIVE, 1.0, 1e-2, Delta_a=1.5, stride=10, record_from=0.5)
    assert traj.t[0] == pytest.approx(0.5, abs=1e-12)
    assert traj.dt == pytest.approx(0.1)


def test_dt_must_resolve_fastest_tone():
    with pytest.raises(ValidationError):
        integrate(CAV, DRIVE, 1.0, 0.05, Delta_a=1.5)


def test_needs_bare_coupling():
    p = SystemParams(omega_m=10.0, gamma_m=0.1, gamma_a0=0.6, gamma_ae=0.4)
    with pytest.raises(ValidationError):
        integrate(p, DRIVE, 1.0, 1e-3, Delta_a=1.5)


def test_blow_up_is_reported():
    p = SystemParams(omega_m=10.0, gamma_m=-5.0, gamma_a0=0.6, gamma_ae=0.4, g=0.0)
    with pytest.raises(Unstable):
        integrate(p, DriveConfig(eps_c=1.0), 20.0, 1e-3, Delta_a=0.0, initial=OdeState(0, 0, 1.0, 0))


def test_unsettled_run_is_not_certified():
    p = SystemParams(omega_m=10.0, gamma_m=1e-3, gamma_a0=0.6, gamma_ae=0.4, g=0.5)
    d = DriveConfig(eps_c=1.0, eps_p=0.01, eps_m=0.1, delta=10.0, omega_q=5.0)
    with pytest.raises(NotConverged):
        integrate(p, d, 60.0, 2 * math.pi / 10 / 64, Delta_a=10.0, certify=[10.0, -10.0, 5.0, -5.0])


def _synthetic(freqs, amps, dt, n, dc=0.0):
    t = np.arange(n) * dt
    x = dc + sum(c * np.exp(-1j * w * t) for w, c in zip(freqs, amps))
    return Trajectory(t, x, x.real.copy(), np.zeros(n))


def test_extract_synthetic_tones():
    freqs = [3.0, -3.0, 2.0, -2.0]
    amps = [1 + 2j, 0.5j, -0.25, 1e-4 + 1e-4j]
    dt = 2 * math.pi / 1.0 / 200
    traj = _synthetic(freqs, amps, dt, 30000, dc=5 - 1j)
    tones = extract_tones(traj, freqs)
    for tone, a in zip(tones, amps):
        assert abs(tone.amplitude - a) < 1e-12
    assert tones[0].residual_power < 1e-24


def test_residual_power_sees_untracked_tone():
    dt = 2 * math.pi / 300
    traj = _synthetic([3.0, -3.0, 6.0], [1.0, 0.0, 0.1], dt, 30000)
    assert extract_tones(traj, [3.0, -3.0])[0].residual_power == pytest.approx(0.01 / 1.01, rel=1e-9)


def test_fundamental_and_window():
    assert fundamental([3.0, -2.0]) == pytest.approx(1.0)
    assert fundamental([1.0, 0.99]) == pytest.approx(0.01)
    dt = 2 * math.pi / 100
    assert window_samples([3.0, 2.0], dt) == 100 * 10


def test_incommensurate_tones_rejected():
    with pytest.raises(IncommensurateWindow):
        fundamental([1.0, math.pi])
    with pytest.raises(IncommensurateWindow):
        window_samples([1.0], 2 * math.pi / 100.01)


def test_bare_from_effective_round_trip():
    p = SystemParams(omega_m=10.0, gamma_m=0.01, gamma_a0=0.6, gamma_ae=0.4)
    eps_c = 3.0
    bare, Delta_a = bare_from_effective(p, 0.2, 9.0, eps_c)
    ss = steady_state(bare, DriveConfig(eps_c=eps_c), "bare", Delta_a=Delta_a)
    assert ss.Delta == pytest.approx(9.0, rel=1e-12)
    assert abs(ss.G) == pytest.approx(0.2, rel=1e-12)


def test_trajectory_csv():
    traj = integrate(CAV, DRIVE, 0.02, 1e-2, Delta_a=1.5)
    lines = traj.to_csv().splitlines()
    assert lines[0] == "t,alpha_re,alpha_im,q,qdot"
    assert len(lines) == 4  # includes t = 0
