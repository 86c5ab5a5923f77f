"""Time-domain check of the frequency-domain solution.

The nonlinear mean-value equations

    d<a>/dt = -[gamma_a + i(Delta_a + g<q>)] <a> + eps_c + eps_p e^{-i delta t - i phi_p}
    d2<q>/dt2 + gamma_m d<q>/dt + omega_m^2 <q>
        = -omega_m g |<a>|^2 - 2 omega_m eps_m cos(omega_q t + phi_m)

are integrated from the undriven steady state, and the steady tones are
projected out over a window that holds a whole number of periods of every
tone. The state is (<a>, <q>, d<q>/dt); the mirror momentum never enters.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from omfields.errors import IncommensurateWindow, NotConverged, Unstable, ValidationError
from omfields.model import DriveConfig, SystemParams, desk_params, experiment_params
from omfields.response import response_coefficients, steady_state

MAX_DENOMINATOR = 10_000
PERIOD_TOL = 1e-9
MIN_STEPS_PER_PERIOD = 50


@dataclass(frozen=True)
class OdeState:
    alpha_re: float
    alpha_im: float
    q: float
    qdot: float


@dataclass(frozen=True)
class Trajectory:
    t: np.ndarray
    alpha: np.ndarray
    q: np.ndarray
    qdot: np.ndarray

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0])

    def state(self, i: int) -> OdeState:
        a = self.alpha[i]
        return OdeState(float(a.real), float(a.imag), float(self.q[i]), float(self.qdot[i]))

    def tail(self, n: int) -> "Trajectory":
        return Trajectory(self.t[-n:], self.alpha[-n:], self.q[-n:], self.qdot[-n:])

    def to_csv(self) -> str:
        lines = ["t,alpha_re,alpha_im,q,qdot"]
        for t, a, q, v in zip(self.t, self.alpha, self.q, self.qdot):
            lines.append(f"{float(t)!r},{float(a.real)!r},{float(a.imag)!r},{float(q)!r},{float(v)!r}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ToneExtraction:
    frequency: float
    amplitude: complex
    window: tuple[float, float]
    residual_power: float


def _rhs_factory(params: SystemParams, drive: DriveConfig, Delta_a: float):
    ga, gm, wm, g = params.gamma_a, params.gamma_m, params.omega_m, params.g
    eps_c = drive.eps_c
    probe = drive.eps_p * cmath.exp(-1j * drive.phi_p)
    delta = drive.delta
    pump = 2 * wm * drive.eps_m
    wq, phi_m = drive.omega_q, drive.phi_m
    wm2 = wm * wm
    exp, cos = cmath.exp, math.cos

    def rhs(t, a, q, v):
        da = -(ga + 1j * (Delta_a + g * q)) * a + eps_c + probe * exp(-1j * delta * t)
        dv = -gm * v - wm2 * q - wm * g * (a.real * a.real + a.imag * a.imag) - pump * cos(wq * t + phi_m)
        return da, v, dv

    return rhs


def integrate(params: SystemParams, drive: DriveConfig, t_end: float, dt: float,
              scheme: str = "rk4", *, Delta_a: float, initial: Optional[OdeState] = None,
              stride: int = 1, record_from: float = 0.0,
              certify: Optional[Sequence[float]] = None, certify_tol: float = 1e-4) -> Trajectory:
    """Integrate the nonlinear mean-value equations with bare detuning ``Delta_a``.

    Starts at the eps_p = eps_m = 0 steady state unless ``initial`` is given.
    Samples every ``stride`` steps from ``record_from`` on. With ``certify``
    (a list of tone frequencies), the amplitudes from the last two extraction
    windows must agree to ``certify_tol`` or :class:`NotConverged` is raised.
    """
    if params.g is None:
        raise ValidationError("the time-domain model needs the bare coupling g")
    fastest = max(params.omega_m, abs(Delta_a), abs(drive.omega_q), abs(drive.delta))
    if dt > 2 * math.pi / (MIN_STEPS_PER_PERIOD * fastest) * (1 + 1e-12):
        raise ValidationError(f"dt = {dt!r} under-resolves the fastest tone ({fastest!r} rad/s)")
    if initial is None:
        ss = steady_state(params, replace(drive, eps_p=0.0, eps_m=0.0), "bare", Delta_a=Delta_a)
        a, q, v = complex(ss.alpha0), float(ss.q0), 0.0
    else:
        a, q, v = complex(initial.alpha_re, initial.alpha_im), initial.q, initial.qdot
    wm = params.omega_m
    # qdot carries an extra factor omega_m relative to q
    scale = max(abs(a) + abs(q) + abs(v) / wm, drive.eps_c / params.gamma_a, 1e-300)
    limit = 1e6 * scale
    rhs = _rhs_factory(params, drive, Delta_a)

    n_steps = int(round(t_end / dt))
    first = int(math.ceil(record_from / dt - 1e-9))
    if scheme == "rk4":
        traj = _rk4(rhs, a, q, v, dt, n_steps, stride, first, limit, wm)
    elif scheme == "rk45-adaptive":
        traj = _rk45(rhs, a, q, v, dt, n_steps, stride, first, limit, wm)
    else:
        raise ValidationError(f"unknown scheme {scheme!r}")

    if certify:
        windowed = [extract_tones(w, certify) for w in _last_two_windows(traj, certify)]
        for prev, last in zip(*windowed):
            ref = max(abs(last.amplitude), 1e-300)
            if abs(last.amplitude - prev.amplitude) > certify_tol * ref:
                raise NotConverged(
                    f"tone at {last.frequency!r} rad/s drifts by "
                    f"{abs(last.amplitude - prev.amplitude) / ref:.2e} between windows"
                )
    return traj


def _rk4(rhs, a, q, v, dt, n_steps, stride, first, limit, wm) -> Trajectory:
    ts, As, Qs, Vs = [], [], [], []
    h2 = dt / 2
    t = 0.0
    for i in range(n_steps + 1):
        if i >= first and (i - first) % stride == 0:
            ts.append(t)
            As.append(a)
            Qs.append(q)
            Vs.append(v)
        if i == n_steps:
            break
        a1, q1, v1 = rhs(t, a, q, v)
        a2, q2, v2 = rhs(t + h2, a + h2 * a1, q + h2 * q1, v + h2 * v1)
        a3, q3, v3 = rhs(t + h2, a + h2 * a2, q + h2 * q2, v + h2 * v2)
        a4, q4, v4 = rhs(t + dt, a + dt * a3, q + dt * q3, v + dt * v3)
        a += dt / 6 * (a1 + 2 * a2 + 2 * a3 + a4)
        q += dt / 6 * (q1 + 2 * q2 + 2 * q3 + q4)
        v += dt / 6 * (v1 + 2 * v2 + 2 * v3 + v4)
        # i * dt instead of accumulating keeps sample times on the exact grid
        t = (i + 1) * dt
        if i % 1024 == 0 and not abs(a) + abs(q) + abs(v) / wm < limit:
            raise Unstable(f"state norm exceeded {limit:.3g} at t = {t!r}")
    return Trajectory(np.array(ts), np.array(As, dtype=complex), np.array(Qs), np.array(Vs))


def _rk45(rhs, a, q, v, dt, n_steps, stride, first, limit, wm) -> Trajectory:
    def f(t, y):
        da, dq, dv = rhs(t, complex(y[0], y[1]), y[2], y[3])
        return [da.real, da.imag, dq, dv]

    def blowup(t, y):
        return limit - (abs(complex(y[0], y[1])) + abs(y[2]) + abs(y[3]) / wm)

    blowup.terminal = True
    t_eval = np.arange(first, n_steps + 1, stride) * dt
    y0 = [a.real, a.imag, q, v]
    atol = 1e-12 * max(abs(x) for x in y0) if any(y0) else 1e-15
    sol = solve_ivp(f, (0.0, n_steps * dt), y0, method="RK45", t_eval=t_eval,
                    rtol=1e-10, atol=atol, max_step=20 * dt, events=blowup)
    if sol.status == 1:
        raise Unstable(f"state norm exceeded {limit:.3g} at t = {sol.t_events[0][0]!r}")
    if sol.status != 0:
        raise Unstable(sol.message)
    y = sol.y
    return Trajectory(sol.t, y[0] + 1j * y[1], y[2].copy(), y[3].copy())


def fundamental(frequencies: Sequence[float]) -> float:
    """Largest omega_0 with every |frequency| an integer multiple of it.

    Ratios are matched against fractions with denominator <= 10^4.
    """
    nonzero = [abs(w) for w in frequencies if w != 0]
    if not nonzero:
        raise IncommensurateWindow("no non-zero tone frequencies")
    ref = max(nonzero)
    lcm = 1
    for w in nonzero:
        r = Fraction(w / ref).limit_denominator(MAX_DENOMINATOR)
        if abs(float(r) - w / ref) > PERIOD_TOL * (w / ref):
            raise IncommensurateWindow(f"{w!r} and {ref!r} rad/s have no common period")
        lcm = lcm * r.denominator // math.gcd(lcm, r.denominator)
    return ref / lcm


def window_samples(frequencies: Sequence[float], dt: float, min_periods: int = 20) -> int:
    """Samples in the shortest window that spans whole periods of every tone
    and at least ``min_periods`` periods of the slowest one."""
    w0 = fundamental(frequencies)
    slowest = min(abs(w) for w in frequencies if w != 0)
    k = max(1, math.ceil(min_periods * w0 / slowest - 1e-9))
    exact = k * 2 * math.pi / w0 / dt
    m = round(exact)
    if m < 2 or abs(exact - m) > PERIOD_TOL * exact:
        raise IncommensurateWindow(f"window of {exact!r} samples is not an integer at dt = {dt!r}")
    return m


def _last_two_windows(traj: Trajectory, frequencies) -> tuple[Trajectory, Trajectory]:
    m = window_samples(frequencies, traj.dt)
    if len(traj.t) < 2 * m:
        raise IncommensurateWindow(f"need {2 * m} samples for two windows, trajectory has {len(traj.t)}")
    n = len(traj.t)
    sl = slice(n - 2 * m, n - m)
    return Trajectory(traj.t[sl], traj.alpha[sl], traj.q[sl], traj.qdot[sl]), traj.tail(m)


def extract_tones(trajectory: Trajectory, frequencies: Sequence[float],
                  channel: str = "alpha") -> list[ToneExtraction]:
    """Project the final commensurate window onto e^{-i omega t} for each omega.

    The amplitude of tone omega is mean(x(t) e^{+i omega t}) over the window.
    The residual power is the part of the window's fluctuation (DC removed
    unless 0 is requested) not captured by the tones, relative to the total.
    """
    m = window_samples(frequencies, trajectory.dt)
    if len(trajectory.t) < m:
        raise IncommensurateWindow(f"window needs {m} samples, trajectory has {len(trajectory.t)}")
    tail = trajectory.tail(m)
    x = {"alpha": tail.alpha, "q": tail.q.astype(complex)}[channel]
    t = tail.t
    fluct = x if 0 in frequencies else x - x.mean()
    amps = [complex(np.mean(x * np.exp(1j * w * t))) for w in frequencies]
    model = sum(c * np.exp(-1j * w * t) for c, w in zip(amps, frequencies) if w != 0)
    total = float(np.mean(np.abs(fluct) ** 2))
    resid = float(np.mean(np.abs(fluct - model) ** 2)) / total if total > 0 else 0.0
    window = (float(t[0]), float(t[-1] + trajectory.dt))
    return [ToneExtraction(w, c, window, resid) for w, c in zip(frequencies, amps)]


# ---------------------------------------------------------------------------
# cross-validation against the frequency-domain coefficients


@dataclass(frozen=True)
class ToneComparison:
    name: str
    frequency: float
    oracle: complex
    solver: complex

    @property
    def rel_dev(self) -> float:
        return abs(self.oracle - self.solver) / abs(self.solver)


@dataclass(frozen=True)
class CrossCheck:
    ratio: float
    tones: tuple[ToneComparison, ...]
    residual_power: float
    steps: int

    @property
    def max_rel_dev(self) -> float:
        return max(c.rel_dev for c in self.tones)


def bare_from_effective(params: SystemParams, G_abs: float, Delta: float,
                        eps_c: float) -> tuple[SystemParams, float]:
    """Real g and bare detuning Delta_a reproducing |G| and the effective Delta."""
    alpha0 = eps_c / (params.gamma_a + 1j * Delta)
    g = G_abs / abs(alpha0)
    Delta_a = Delta + g * g * abs(alpha0) ** 2 / params.omega_m
    return replace(params, g=g), Delta_a


def cross_check(params: Optional[SystemParams] = None, G_abs: float = 2 * math.pi * 1.5e6,
                Delta: Optional[float] = None, delta: Optional[float] = None,
                omega_q: Optional[float] = None, ratio: float = 1e-3,
                steps_per_period: int = 128, settle: float = 24.0,
                scheme: str = "rk4", phi_p: float = 0.0, phi_m: float = 0.0) -> CrossCheck:
    """Integrate at drive ratio eps_p/eps_c = eps_m/eps_c = ``ratio`` and compare
    the four optical tones with the closed-form coefficients.

    Defaults: desk-scaled rates, Delta = delta = omega_m, omega_q = 0.99 omega_m
    (the probe and pump tones must differ to be separable). The run lasts
    ``settle``/gamma_m, rounded up to whole windows, plus two windows.
    eps_c is chosen so that |alpha_0| = 1.
    """
    params = desk_params() if params is None else params
    wm = params.omega_m
    Delta = wm if Delta is None else Delta
    delta = wm if delta is None else delta
    omega_q = 0.99 * wm if omega_q is None else omega_q
    if delta == omega_q:
        raise ValidationError("probe and pump tones coincide; choose omega_q != delta")

    eps_c = abs(params.gamma_a + 1j * Delta)
    bare, Delta_a = bare_from_effective(params, G_abs, Delta, eps_c)
    drive = DriveConfig(eps_c=eps_c, eps_p=ratio * eps_c, phi_p=phi_p, eps_m=ratio * eps_c,
                        phi_m=phi_m, omega_q=omega_q, delta=delta, Delta=Delta)
    ss = steady_state(bare, drive, "bare", Delta_a=Delta_a)
    drive = replace(drive, Delta=ss.Delta)
    coeffs = response_coefficients(bare, ss.G, drive)

    freqs = [delta, -delta, omega_q, -omega_q]
    w0 = fundamental(freqs)
    fastest = max(abs(f) for f in freqs + [wm, Delta_a])
    per_fund = max(1, math.ceil(fastest / w0 * steps_per_period))
    dt = 2 * math.pi / w0 / per_fund
    m = window_samples(freqs, dt)
    window = m * dt
    n_windows = math.ceil(settle / params.gamma_m / window) + 2
    t_end = n_windows * window
    traj = integrate(bare, drive, t_end, dt, scheme, Delta_a=Delta_a,
                     record_from=t_end - 2 * window, certify=freqs)
    tones = extract_tones(traj, freqs)
    solver = [coeffs.alpha_p_plus, coeffs.alpha_p_minus, coeffs.alpha_m_plus, coeffs.alpha_m_minus]
    names = ["alpha_p_plus", "alpha_p_minus", "alpha_m_plus", "alpha_m_minus"]
    comps = tuple(ToneComparison(n, x.frequency, x.amplitude, s) for n, x, s in zip(names, tones, solver))
    return CrossCheck(ratio, comps, tones[0].residual_power, int(round(t_end / dt)))


def full_scale_cross_check(ratio: float = 1e-3, **kwargs) -> CrossCheck:
    """Same comparison at the experimental gamma_m (Q ~ 6.5e4); minutes of runtime."""
    return cross_check(experiment_params(), ratio=ratio, **kwargs)
