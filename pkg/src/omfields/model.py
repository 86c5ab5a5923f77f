"""Domain types and unit conventions.

Every frequency-like quantity is stored in rad/s. Values quoted as
``2*pi x f`` are converted once, at parse time, with :func:`to_rad_s`.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional

log = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi

# drives above this fraction of eps_c break the linearized four-tone picture
LINEARIZATION_RATIO = 0.1


def to_rad_s(value_over_2pi_hz: float) -> float:
    """Convert a value written as a multiple of 2*pi (in Hz) to rad/s."""
    return TWO_PI * value_over_2pi_hz


def to_over_2pi_hz(value_rad_s: float) -> float:
    return value_rad_s / TWO_PI


def reduce_phase(phi: float) -> float:
    """Map an angle into (-pi, pi]."""
    r = math.remainder(phi, TWO_PI)
    return math.pi if r == -math.pi else r


@dataclass(frozen=True)
class SystemParams:
    """Fixed rates of the cavity and the mechanical resonator (rad/s)."""

    omega_m: float
    gamma_m: float
    gamma_a0: float
    gamma_ae: float
    g: Optional[float] = None

    @property
    def gamma_a(self) -> float:
        return self.gamma_a0 + self.gamma_ae


@dataclass(frozen=True)
class DriveConfig:
    """Amplitudes, phases and frequencies of the three drives.

    ``delta`` is the probe-coupling detuning and ``Delta`` the effective
    cavity detuning. Amplitudes are real and non-negative; phases are
    carried separately.
    """

    eps_c: float = 1.0
    eps_p: float = 1e-3
    phi_p: float = 0.0
    eps_m: float = 0.0
    phi_m: float = 0.0
    omega_q: float = 0.0
    delta: float = 0.0
    Delta: float = 0.0

    @property
    def eta(self) -> float:
        if self.eps_p <= 0:
            raise ZeroDivisionError("eta = eps_m/eps_p is undefined for eps_p = 0")
        return self.eps_m / self.eps_p

    @property
    def phi(self) -> float:
        return reduce_phase(self.phi_p - self.phi_m)

    def with_eta_phi(self, eta: float, phi: float) -> "DriveConfig":
        """Return a copy with eps_m and phi_p set so that (eta, phi) hold."""
        return replace(self, eps_m=eta * self.eps_p, phi_p=self.phi_m + phi)

    def resonant(self, delta: float) -> "DriveConfig":
        """Copy with both the probe detuning and the pump frequency at ``delta``."""
        return replace(self, delta=delta, omega_q=delta)


@dataclass(frozen=True)
class SteadyState:
    alpha0: complex
    G: complex
    Delta: float
    q0: Optional[float] = None


@dataclass(frozen=True)
class ResponseCoefficients:
    """Amplitudes of the four optical tones and two mechanical tones."""

    alpha_p_plus: complex
    alpha_p_minus: complex
    q_p: complex
    alpha_m_plus: complex
    alpha_m_minus: complex
    q_m: complex


@dataclass(frozen=True)
class OutputFields:
    """Normalized output amplitudes.

    ``delta``, ``omega_q`` and ``omega_m`` record where the fields were
    evaluated so the resonance condition can be checked before combining.
    t_f and t_l depend on the drive phases (they scale as e^{2i phi_p} and
    e^{2i phi_m}), so the phases used are recorded too.
    """

    t_p: complex
    t_f: complex
    t_u: complex
    t_l: complex
    delta: float
    omega_q: float
    omega_m: float
    phi_p: float = 0.0
    phi_m: float = 0.0
    t_pu: Optional[complex] = None
    t_fl: Optional[complex] = None
    theta: Optional[float] = None


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def validate(params: SystemParams, drive: Optional[DriveConfig] = None) -> ValidationReport:
    """Collect violated invariants without raising.

    Linearization breaches (eps_p or eps_m not much smaller than eps_c) are
    reported as warnings only.
    """
    report = ValidationReport()
    rates = {
        "omega_m": params.omega_m,
        "gamma_m": params.gamma_m,
        "gamma_a0": params.gamma_a0,
        "gamma_ae": params.gamma_ae,
    }
    for name, value in rates.items():
        if not math.isfinite(value):
            report.violations.append(f"{name}: rates must be finite")
        elif value <= 0:
            report.violations.append(f"{name}: rates strictly positive (got {value!r})")
    if params.g is not None and not (math.isfinite(params.g) and params.g >= 0):
        report.violations.append(f"g: coupling must be finite and non-negative (got {params.g!r})")
    if params.gamma_m > 0 and params.omega_m > 0 and not params.gamma_m < params.omega_m:
        report.violations.append("gamma_m < omega_m: mechanical mode must be underdamped")

    if drive is not None:
        for name in ("eps_c", "eps_p", "eps_m"):
            value = getattr(drive, name)
            if not (math.isfinite(value) and value >= 0):
                report.violations.append(f"{name}: drive amplitudes are real and >= 0 (got {value!r})")
        for name in ("phi_p", "phi_m", "omega_q", "delta", "Delta"):
            if not math.isfinite(getattr(drive, name)):
                report.violations.append(f"{name}: must be finite")
        if report.ok:
            limit = LINEARIZATION_RATIO * drive.eps_c
            for name in ("eps_p", "eps_m"):
                if getattr(drive, name) > limit:
                    msg = f"{name}: linearization condition {name} << eps_c not met"
                    report.warnings.append(msg)
                    log.warning(msg)
    return report


def experiment_params(gamma_m: Optional[float] = None) -> SystemParams:
    """Experimental rates used throughout: omega_m = 2pi x 1.094 GHz,
    gamma_a = 2pi x 0.255 GHz with 20% through the input mirror,
    gamma_m = 2pi x 16.8 kHz."""
    gamma_a = to_rad_s(0.255e9)
    return SystemParams(
        omega_m=to_rad_s(1.094e9),
        gamma_m=to_rad_s(16.8e3) if gamma_m is None else gamma_m,
        gamma_a0=0.8 * gamma_a,
        gamma_ae=0.2 * gamma_a,
    )


def desk_params() -> SystemParams:
    """Experimental rates with gamma_m raised to 1e-3 omega_m so transients die in ~10^4 periods."""
    base = experiment_params()
    return replace(base, gamma_m=1e-3 * base.omega_m)
