"""Derived observables and the sweep engine behind every figure."""

from __future__ import annotations

import cmath
import itertools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Sequence

import numpy as np
from scipy import optimize

from omfields.errors import (
    DegenerateSideband,
    GridTooNarrow,
    NumericalError,
    PhaseSingularity,
    ValidationError,
)
from omfields.model import DriveConfig, SystemParams, reduce_phase
from omfields.response import combined_fields, normalized_outputs, resonant_fields

# below this |t_pu| the phase is treated as undefined
SINGULAR_AMPLITUDE = 1e-9


@dataclass(frozen=True)
class DelayResult:
    delta: float
    theta: float
    tau_g: float
    method: str


def _theta(params, G, Delta, delta, eta, phi):
    t = resonant_fields(params, G, Delta, delta, eta, phi).t_pu
    if abs(t) < SINGULAR_AMPLITUDE:
        raise PhaseSingularity(f"|t_pu| = {abs(t):.3g} at delta = {delta!r}")
    return cmath.phase(t), t


def _five_point(params, G, Delta, delta, eta, phi, h, center):
    """Five-point derivative of theta with every stencil phase continued onto
    the branch nearest the central value."""
    vals = []
    for k in (-2, -1, 1, 2):
        th, _ = _theta(params, G, Delta, delta + k * h, eta, phi)
        vals.append(center + math.remainder(th - center, 2 * math.pi))
    m2, m1, p1, p2 = vals
    return (m2 - 8 * m1 + 8 * p1 - p2) / (12 * h)


def _representable_step(x: float, h: float) -> float:
    """Nudge h so that x + k h is exact in floating point for the stencil offsets."""
    return (x + h) - x


def _linewidth(params: SystemParams, G: complex) -> float:
    # mechanical width plus optical damping, resolved-sideband estimate
    return params.gamma_m + 2 * abs(G) ** 2 / params.gamma_a


def _tpu_derivative(params, G, Delta, delta, eta, phi):
    """d t_pu / d delta with omega_q = delta, by the chain rule on the closed form.

    With omega_q = delta the probe and pump branches share the denominator
    den = gamma_a + i(Delta - delta) + i chi |G|^2, so
    t_pu = 2 gamma_ae (1 - i eta e^{i phi} G chi) / den - 1.
    """
    wm, gm, ga = params.omega_m, params.gamma_m, params.gamma_a
    G2 = abs(G) ** 2
    opt = ga - 1j * (Delta + delta)
    D = wm**2 - delta**2 - 1j * gm * delta + 1j * wm * G2 / opt
    dD = -2 * delta - 1j * gm - wm * G2 / opt**2
    chi = -wm / D
    dchi = wm * dD / D**2
    den = ga + 1j * (Delta - delta) + 1j * chi * G2
    dden = -1j + 1j * dchi * G2
    pump = eta * cmath.exp(1j * phi) * G
    num = 1 - 1j * pump * chi
    dnum = -1j * pump * dchi
    t = 2 * params.gamma_ae * num / den - 1
    dt = 2 * params.gamma_ae * (dnum * den - num * dden) / den**2
    return t, dt


def group_delay(params: SystemParams, G: complex, Delta: float, delta: float,
                eta: float = 0.0, phi: float = 0.0, method: str = "central_difference",
                rtol: float = 1e-7) -> DelayResult:
    """Group delay d theta / d delta of the combined probe output, in seconds.

    The pump frequency follows delta so the combined field is defined at every
    stencil point. ``central_difference`` uses a five-point stencil whose step
    is set by the local linewidth (or by the distance to a transmission zero,
    whichever is smaller) and halved until two successive estimates agree to
    ``rtol``; ``analytic`` differentiates the closed form.
    """
    if method == "analytic":
        t, dt = _tpu_derivative(params, G, Delta, delta, eta, phi)
        if abs(t) < SINGULAR_AMPLITUDE:
            raise PhaseSingularity(f"|t_pu| = {abs(t):.3g} at delta = {delta!r}")
        return DelayResult(delta, cmath.phase(t), (dt / t).imag, method)
    if method != "central_difference":
        raise ValidationError(f"unknown group-delay method {method!r}")

    theta, t0 = _theta(params, G, Delta, delta, eta, phi)
    width = _linewidth(params, G)
    probe = 1e-2 * width
    _, tp = _theta(params, G, Delta, delta + probe, eta, phi)
    _, tm = _theta(params, G, Delta, delta - probe, eta, phi)
    slope = abs(tp - tm) / (2 * probe)
    local = width if slope == 0 else min(width, abs(t0) / slope)
    h = max(1e-6 * params.gamma_m, 1e-3 * local)

    h = _representable_step(delta, h)
    coarse = _five_point(params, G, Delta, delta, eta, phi, h, theta)
    best, best_err = coarse, math.inf
    for _ in range(20):
        h = _representable_step(delta, h / 2)
        fine = _five_point(params, G, Delta, delta, eta, phi, h, theta)
        err = abs(fine - coarse)
        if err <= rtol * abs(fine):
            return DelayResult(delta, theta, fine + (fine - coarse) / 15, method)
        if err > best_err:
            # differences growing again: rounding now dominates truncation
            break
        best, best_err = fine + (fine - coarse) / 15, err
        coarse = fine
    return DelayResult(delta, theta, best, method)


def fwm_null(params: SystemParams, G: complex, Delta: float, delta: float) -> tuple[float, float]:
    """(eta, phi) at which the FWM-frequency output vanishes:
    eta e^{i phi} = -G* / (gamma_a + i(Delta - delta))."""
    if G == 0:
        raise ValidationError("G must be non-zero")
    z = -complex(G).conjugate() / (params.gamma_a + 1j * (Delta - delta))
    return abs(z), reduce_phase(cmath.phase(z))


def probe_null(params: SystemParams, G: complex, Delta: float, delta: float) -> tuple[float, float]:
    """(eta, phi) at which t_p + eta t_u e^{i phi} = 0."""
    out = normalized_outputs(params, G, Delta, delta)
    if abs(out.t_u) < 1e-12 * abs(out.t_p):
        raise DegenerateSideband(f"|t_u| = {abs(out.t_u):.3g} is negligible against |t_p|")
    z = -out.t_p / out.t_u
    return abs(z), reduce_phase(cmath.phase(z))


def optimal_coupling(params: SystemParams, Delta: float, omega_q: float,
                     G_min: float, G_max: float, n: int = 200,
                     rtol: float = 1e-4) -> tuple[float, float]:
    """G maximizing the upper-sideband strength |t_u|^2 and the peak value.

    A ``n``-point linear pre-scan locates the peak, then a golden-section
    search on the bracketing cells refines it to ``rtol`` in G.
    """

    def tu2(G):
        return abs(normalized_outputs(params, G, Delta, omega_q, omega_q).t_u) ** 2

    grid = np.linspace(G_min, G_max, n)
    vals = [tu2(G) for G in grid]
    i = int(np.argmax(vals))
    if i == 0 or i == n - 1:
        raise GridTooNarrow(f"|t_u|^2 peaks at the grid edge G = {grid[i]!r}")
    res = optimize.minimize_scalar(
        lambda G: -tu2(G), bracket=(grid[i - 1], grid[i], grid[i + 1]),
        method="golden", tol=rtol,
    )
    return float(res.x), float(-res.fun)


def fwhm(x: Sequence[float], y: Sequence[float]) -> float:
    """Full width at half maximum of a single-peaked curve, by linear interpolation."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    i = int(np.argmax(y))
    half = y[i] / 2
    left = np.nonzero(y[:i] < half)[0]
    right = np.nonzero(y[i:] < half)[0]
    if not len(left) or not len(right):
        raise GridTooNarrow("curve does not fall to half maximum inside the grid")
    a = left[-1]
    b = i + right[0]
    xl = np.interp(half, [y[a], y[a + 1]], [x[a], x[a + 1]])
    xr = np.interp(half, [y[b], y[b - 1]], [x[b], x[b - 1]])
    return float(xr - xl)


# ---------------------------------------------------------------------------
# sweeps

AXES = ("delta", "eta", "phi", "G", "omega_q")
OBSERVABLES = ("t_p_sq", "t_f_sq", "t_u_sq", "t_l_sq", "t_pu_sq", "t_fl_sq", "theta", "tau_g")
COMBINED = {"t_pu_sq", "t_fl_sq", "theta", "tau_g"}


@dataclass(frozen=True)
class Axis:
    name: str
    values: tuple[float, ...]

    @classmethod
    def linear(cls, name: str, start: float, stop: float, count: int) -> "Axis":
        if count < 1 or (count == 1 and start != stop):
            raise ValidationError(f"{name}: grid count must be >= 2 (or 1 with start == stop)")
        return cls(name, tuple(float(v) for v in np.linspace(start, stop, count)))


@dataclass(frozen=True)
class SweepSpec:
    """One- or two-axis grid over a fixed system.

    ``drive`` supplies the fixed values (delta, omega_q, Delta, eta, phi);
    axis values override them point by point. With ``resonant`` set, delta
    and omega_q move together.
    """

    params: SystemParams
    drive: DriveConfig
    G: complex
    axes: tuple[Axis, ...]
    observables: tuple[str, ...]
    resonant: bool = True
    delay_method: str = "central_difference"

    def __post_init__(self):
        if not 1 <= len(self.axes) <= 2:
            raise ValidationError("a sweep has one or two axes")
        names = [a.name for a in self.axes]
        if len(set(names)) != len(names):
            raise ValidationError(f"repeated sweep axis in {names}")
        for name in names:
            if name not in AXES:
                raise ValidationError(f"unknown sweep axis {name!r}; expected one of {AXES}")
        if self.resonant and {"delta", "omega_q"} <= set(names):
            raise ValidationError("delta and omega_q cannot both be axes when resonant")
        if not self.observables:
            raise ValidationError("no observables requested")
        for obs in self.observables:
            if obs not in OBSERVABLES:
                raise ValidationError(f"unknown observable {obs!r}; expected one of {OBSERVABLES}")


@dataclass
class SweepResult:
    columns: tuple[str, ...]
    rows: list[tuple] = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        j = self.columns.index(name)
        return np.array([r[j] for r in self.rows])

    def to_csv(self) -> str:
        lines = [",".join(self.columns)]
        for row in self.rows:
            lines.append(",".join(v if isinstance(v, str) else repr(float(v)) for v in row))
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        cols = {}
        for j, name in enumerate(self.columns):
            cols[name] = [
                r[j] if isinstance(r[j], str) else (None if math.isnan(r[j]) else float(r[j]))
                for r in self.rows
            ]
        return json.dumps({"columns": list(self.columns), "data": cols}, indent=1) + "\n"


def evaluate_point(spec: SweepSpec, coords: tuple[float, ...]) -> tuple:
    """Observables at one grid point; numerical failures become NaN plus an error tag."""
    d = dict(zip((a.name for a in spec.axes), coords))
    delta = d.get("delta", spec.drive.delta)
    omega_q = d.get("omega_q", spec.drive.omega_q)
    if spec.resonant:
        if "omega_q" in d:
            delta = omega_q
        else:
            omega_q = delta
    eta = d.get("eta", spec.drive.eta)
    phi = d.get("phi", spec.drive.phi)
    G = d.get("G", spec.G)
    Delta = spec.drive.Delta
    try:
        out = normalized_outputs(spec.params, G, Delta, delta, omega_q, phi_p=phi)
        values = {
            "t_p_sq": abs(out.t_p) ** 2,
            "t_f_sq": abs(out.t_f) ** 2,
            "t_u_sq": abs(out.t_u) ** 2,
            "t_l_sq": abs(out.t_l) ** 2,
        }
        if COMBINED & set(spec.observables):
            comb = combined_fields(out, eta, phi)
            values["t_pu_sq"] = abs(comb.t_pu) ** 2
            values["t_fl_sq"] = abs(comb.t_fl) ** 2
            values["theta"] = comb.theta
            if "tau_g" in spec.observables:
                values["tau_g"] = group_delay(spec.params, G, Delta, delta, eta, phi,
                                              spec.delay_method).tau_g
        return tuple(float(values[o]) for o in spec.observables) + ("",)
    except (NumericalError, ValidationError) as exc:
        return (math.nan,) * len(spec.observables) + (type(exc).__name__,)


def run_sweep(spec: SweepSpec, workers: int = 1) -> SweepResult:
    """Evaluate every grid point; rows follow the grid indices lexicographically
    (first axis slowest) regardless of ``workers``."""
    grid = list(itertools.product(*(a.values for a in spec.axes)))
    fn = partial(evaluate_point, spec)
    if workers > 1 and len(grid) > 1:
        chunk = max(1, len(grid) // (4 * workers))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(fn, grid, chunksize=chunk))
    else:
        values = [fn(c) for c in grid]
    columns = tuple(a.name for a in spec.axes) + tuple(spec.observables) + ("error",)
    return SweepResult(columns, [tuple(c) + v for c, v in zip(grid, values)])
