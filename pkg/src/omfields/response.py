"""Frequency-domain solution of the linearized optomechanical equations.

Formulas are evaluated in the grouping they are usually printed in (no
algebraic simplification) so the harmonic-balance residuals in
:func:`linearized_residuals` stay meaningful near machine precision.
All functions take scalars; ``susceptibility`` also broadcasts over arrays.
"""

from __future__ import annotations

import cmath
from typing import Optional

import numpy as np

from omfields.errors import BistableAmbiguity, DivisionByZeroDrive, ResonanceMismatch, ValidationError
from omfields.model import DriveConfig, OutputFields, ResponseCoefficients, SteadyState, SystemParams, reduce_phase

# |omega_q - delta| allowed when summing tones, in units of omega_m
RESONANCE_TOL = 1e-9


def steady_state(
    params: SystemParams,
    drive: DriveConfig,
    mode: str = "effective",
    *,
    G: Optional[complex] = None,
    Delta_a: Optional[float] = None,
    branch: Optional[int] = None,
) -> SteadyState:
    """Zeroth-order cavity field and mirror displacement.

    In ``effective`` mode ``drive.Delta`` is taken as the effective detuning;
    G is the supplied value, or ``g * alpha0`` when only g is known.

    In ``bare`` mode the static shift y = g*q0 solves the cubic

        y * (gamma_a**2 + (Delta_a + y)**2) + g**2 eps_c**2 / omega_m = 0,

    and Delta = Delta_a + y. Three real roots raise :class:`BistableAmbiguity`
    unless ``branch`` indexes one of them (sorted ascending).
    """
    ga = params.gamma_a
    if mode == "effective":
        alpha0 = drive.eps_c / (ga + 1j * drive.Delta)
        if G is None:
            if params.g is None:
                raise ValidationError("effective mode needs G or g")
            G = params.g * alpha0
        q0 = None if params.g is None else -(params.g / params.omega_m) * abs(alpha0) ** 2
        return SteadyState(alpha0=alpha0, G=complex(G), Delta=drive.Delta, q0=q0)

    if mode != "bare":
        raise ValidationError(f"mode must be 'effective' or 'bare', got {mode!r}")
    if params.g is None or Delta_a is None:
        raise ValidationError("bare mode needs g and Delta_a")
    g = params.g
    if g == 0:
        shift = 0.0
    else:
        shift = _static_shift(ga, Delta_a, g * g * drive.eps_c**2 / params.omega_m, branch)
    Delta = Delta_a + shift
    alpha0 = drive.eps_c / (ga + 1j * Delta)
    q0 = 0.0 if g == 0 else shift / g
    return SteadyState(alpha0=alpha0, G=g * alpha0, Delta=Delta, q0=q0)


def _static_shift(ga: float, Delta_a: float, K: float, branch: Optional[int]) -> float:
    def f(y):
        return y * (ga * ga + (Delta_a + y) ** 2) + K

    def df(y):
        return ga * ga + (Delta_a + y) ** 2 + 2 * y * (Delta_a + y)

    roots = np.roots([1.0, 2 * Delta_a, ga * ga + Delta_a * Delta_a, K])
    scale = max(abs(Delta_a), ga)
    real = sorted(r.real for r in roots if abs(r.imag) <= 1e-7 * scale)
    if not real:
        # the cubic always has a real root; fall back to the least-imaginary one
        real = [min(roots, key=lambda r: abs(r.imag)).real]
    if len(real) == 3:
        if branch is None:
            raise BistableAmbiguity([Delta_a + r for r in real])
        real = [real[branch]]
    elif branch not in (None, 0):
        raise ValidationError(f"branch={branch} requested but only one real root exists")
    y = real[0]
    for _ in range(50):
        step = f(y) / df(y)
        y -= step
        if abs(step) <= 1e-16 * max(abs(y), 1e-300):
            break
    return float(y)


def susceptibility(params: SystemParams, G: complex, Delta: float, omega):
    """Mechanical susceptibility dressed by the optical self-energy."""
    wm = params.omega_m
    return -wm / (
        wm**2 - omega**2 - 1j * params.gamma_m * omega
        + 1j * wm * abs(G) ** 2 / (params.gamma_a - 1j * (Delta + omega))
    )


def probe_coefficients(params: SystemParams, G: complex, Delta: float, delta: float,
                       eps_p: float, phi_p: float) -> tuple[complex, complex, complex]:
    """(alpha_p+, alpha_p-, q_p) driven by the probe at detuning ``delta``."""
    if eps_p < 0:
        raise ValidationError("eps_p must be non-negative")
    ga = params.gamma_a
    drive = eps_p * cmath.exp(-1j * phi_p)
    chi = susceptibility(params, G, Delta, delta)
    G2 = abs(G) ** 2
    alpha_plus = drive / (ga + 1j * (Delta - delta) + 1j * chi * G2)
    q_p = chi * G.conjugate() * drive / (ga + 1j * (Delta - delta) + 1j * chi * G2)
    alpha_minus = (-1j * G) / (ga + 1j * (Delta + delta)) * q_p.conjugate()
    return complex(alpha_plus), complex(alpha_minus), complex(q_p)


def pump_coefficients(params: SystemParams, G: complex, Delta: float, omega_q: float,
                      eps_m: float, phi_m: float) -> tuple[complex, complex, complex]:
    """(alpha_m+, alpha_m-, q_m) driven by the mechanical pump at ``omega_q``."""
    if eps_m < 0:
        raise ValidationError("eps_m must be non-negative")
    ga = params.gamma_a
    drive = eps_m * cmath.exp(-1j * phi_m)
    chi = susceptibility(params, G, Delta, omega_q)
    G2 = abs(G) ** 2
    alpha_plus = (-1j * chi * G) / (ga + 1j * (Delta - omega_q) + 1j * chi * G2) * drive
    q_m = chi * (ga + 1j * (Delta - omega_q)) / (ga + 1j * (Delta - omega_q) + 1j * chi * G2) * drive
    alpha_minus = (-1j * G) / (ga + 1j * (Delta + omega_q)) * q_m.conjugate()
    return complex(alpha_plus), complex(alpha_minus), complex(q_m)


def response_coefficients(params: SystemParams, G: complex, drive: DriveConfig) -> ResponseCoefficients:
    app, apm, qp = probe_coefficients(params, G, drive.Delta, drive.delta, drive.eps_p, drive.phi_p)
    amp, amm, qm = pump_coefficients(params, G, drive.Delta, drive.omega_q, drive.eps_m, drive.phi_m)
    return ResponseCoefficients(app, apm, qp, amp, amm, qm)


def output_fields(params: SystemParams, coefficients: ResponseCoefficients, drive: DriveConfig) -> OutputFields:
    """Input-output relation: probe/FWM outputs normalized to the probe drive,
    upper/lower sidebands normalized to the mechanical drive."""
    if drive.eps_p == 0:
        raise DivisionByZeroDrive("t_p and t_f are normalized by eps_p, which is zero")
    if drive.eps_m == 0:
        raise DivisionByZeroDrive("t_u and t_l are normalized by eps_m, which is zero")
    k = 2 * params.gamma_ae
    probe = drive.eps_p * cmath.exp(-1j * drive.phi_p)
    pump = drive.eps_m * cmath.exp(-1j * drive.phi_m)
    c = coefficients
    return OutputFields(
        t_p=(k * c.alpha_p_plus - probe) / probe,
        t_f=k * c.alpha_p_minus / probe,
        t_u=k * c.alpha_m_plus / pump,
        t_l=k * c.alpha_m_minus / pump,
        delta=drive.delta,
        omega_q=drive.omega_q,
        omega_m=params.omega_m,
        phi_p=drive.phi_p,
        phi_m=drive.phi_m,
    )


def normalized_outputs(params: SystemParams, G: complex, Delta: float, delta: float,
                       omega_q: Optional[float] = None, phi_p: float = 0.0,
                       phi_m: float = 0.0) -> OutputFields:
    """Outputs computed with unit drive amplitudes; valid for any drive scale by linearity.

    ``omega_q`` defaults to ``delta`` (the resonant configuration).
    """
    omega_q = delta if omega_q is None else omega_q
    unit = DriveConfig(eps_c=1.0, eps_p=1.0, eps_m=1.0, phi_p=phi_p, phi_m=phi_m,
                       delta=delta, omega_q=omega_q, Delta=Delta)
    return output_fields(params, response_coefficients(params, G, unit), unit)


def combined_fields(outputs: OutputFields, eta: float, phi: float) -> OutputFields:
    """Add the pump-generated tones to the probe and FWM outputs they overlap with.

    If the recorded drive phases of ``outputs`` do not differ by ``phi``,
    t_f and t_l are first re-phased to phi_p = phi_m + phi (phi_m held),
    using their exact e^{2i phi_p}, e^{2i phi_m} dependence. t_p and t_u
    carry no phase dependence.
    """
    if eta < 0:
        raise ValidationError("eta must be non-negative")
    if abs(outputs.omega_q - outputs.delta) > RESONANCE_TOL * outputs.omega_m:
        raise ResonanceMismatch(
            f"omega_q={outputs.omega_q!r} and delta={outputs.delta!r} differ; "
            "tones at different frequencies cannot be summed"
        )
    t_f, phi_p = outputs.t_f, outputs.phi_p
    if reduce_phase(outputs.phi_p - outputs.phi_m - phi) != 0.0:
        phi_p = outputs.phi_m + phi
        t_f = t_f * cmath.exp(2j * (phi_p - outputs.phi_p))
    phasor = cmath.exp(1j * phi)
    t_pu = outputs.t_p + eta * outputs.t_u * phasor
    t_fl = t_f + eta * outputs.t_l * phasor
    return OutputFields(
        t_p=outputs.t_p, t_f=t_f, t_u=outputs.t_u, t_l=outputs.t_l,
        delta=outputs.delta, omega_q=outputs.omega_q, omega_m=outputs.omega_m,
        phi_p=phi_p, phi_m=outputs.phi_m,
        t_pu=t_pu, t_fl=t_fl, theta=reduce_phase(cmath.phase(t_pu)),
    )


def resonant_fields(params: SystemParams, G: complex, Delta: float, delta: float,
                    eta: float, phi: float) -> OutputFields:
    """Combined outputs at omega_q = delta, with phi_m = 0 and phi_p = phi."""
    return combined_fields(normalized_outputs(params, G, Delta, delta, phi_p=phi), eta, phi)


def linearized_residuals(params: SystemParams, G: complex, drive: DriveConfig,
                         c: ResponseCoefficients) -> dict[str, float]:
    """Relative residuals of the harmonic balance of the linearized equations.

    Each tone of the ansatz must cancel separately in

        d/dt a = -(gamma_a + i Delta) a - i G q + eps_p e^{-i delta t - i phi_p}
        q'' + gamma_m q' + omega_m^2 q
            = -omega_m [eps_m e^{i(omega_q t + phi_m)} + G a* + c.c.]

    Returns {equation-tone: |sum of terms| / max |term|}.
    """
    ga, wm, gm, D = params.gamma_a, params.omega_m, params.gamma_m, drive.Delta
    Gc = G.conjugate()
    Ep = drive.eps_p * cmath.exp(-1j * drive.phi_p)
    Em = drive.eps_m * cmath.exp(-1j * drive.phi_m)
    d, w = drive.delta, drive.omega_q

    balances = {
        "cavity@-delta": [(-1j * d + ga + 1j * D) * c.alpha_p_plus, 1j * G * c.q_p, -Ep],
        "cavity@+delta": [(1j * d + ga + 1j * D) * c.alpha_p_minus, 1j * G * c.q_p.conjugate()],
        "mech@-delta": [(wm**2 - d**2 - 1j * gm * d) * c.q_p,
                        wm * G * c.alpha_p_minus.conjugate(), wm * Gc * c.alpha_p_plus],
        "cavity@-omega_q": [(-1j * w + ga + 1j * D) * c.alpha_m_plus, 1j * G * c.q_m],
        "cavity@+omega_q": [(1j * w + ga + 1j * D) * c.alpha_m_minus, 1j * G * c.q_m.conjugate()],
        "mech@-omega_q": [(wm**2 - w**2 - 1j * gm * w) * c.q_m, wm * Em,
                          wm * G * c.alpha_m_minus.conjugate(), wm * Gc * c.alpha_m_plus],
    }
    out = {}
    for name, terms in balances.items():
        scale = max(abs(t) for t in terms)
        out[name] = 0.0 if scale == 0 else abs(sum(terms)) / scale
    return out

