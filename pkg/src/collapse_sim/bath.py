"""
Ohmic bath of harmonic oscillators and the Brownian width it imprints on
the main coordinate.

Each bath oscillator j (mass m_j, frequency w_j, coupling c_j) enters the
main coordinate through

    xi_j(t) = x_j0 b_j1(t) + xdot_j0 b_j2(t)

where b_j1 and b_j2 are the responses of the damped oscillator to the
forcings -(c_j/M) cos(w_j t) and -(c_j/M) sin(w_j t)/w_j.  With the bath
in its ground state, <xi_j**2> = (b_j1**2 + w_j**2 b_j2**2) hbar/(2 m_j w_j).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, UnsupportedRegimeError
from .oscillator import ModelParams, Regime, coeffs

__all__ = [
    "BathOscillator",
    "BathDiscretization",
    "BrownianWidth",
    "build_ohmic_bath",
    "bath_coeffs",
    "bath_coeff_arrays",
    "sigma_xi_sq_sum",
    "sigma_xi_sq_series",
    "sigma_xi_sq_asymptotic",
    "weak_damping_width",
    "thermal_factor",
]


@dataclass(frozen=True)
class BathOscillator:
    m: float
    omega: float
    c: float

    def __post_init__(self):
        for name in ("m", "omega", "c"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ParameterError(f"bath oscillator {name} must be finite and >= 0")
        if self.m == 0 or self.omega == 0:
            raise ParameterError("bath oscillator mass and frequency must be positive")


@dataclass(frozen=True, eq=False)
class BathDiscretization:
    """A finite bath stored as parallel arrays, ordered by frequency."""

    masses: np.ndarray
    omegas: np.ndarray
    couplings: np.ndarray
    omega_cutoff: float
    scheme: str = "uniform-frequency"

    def __len__(self):
        return len(self.omegas)

    @property
    def delta_omega(self) -> float:
        return self.omega_cutoff / len(self)

    @property
    def oscillators(self) -> list[BathOscillator]:
        return [BathOscillator(float(m), float(w), float(c))
                for m, w, c in zip(self.masses, self.omegas, self.couplings)]


@dataclass(frozen=True)
class BrownianWidth:
    sigma_xi_sq: float
    method: str
    t: float


def build_ohmic_bath(params: ModelParams, n: int, omega_cutoff: float) -> BathDiscretization:
    """Discretize an Ohmic bath on a uniform midpoint frequency grid.

    Oscillator j sits at (j - 1/2) * dw with dw = omega_cutoff / n and has
    unit mass.  The couplings satisfy the Ohmic constraint with density
    1/dw, so c_j**2 = (2 eta M / pi) m_j w_j**2 dw.  The frequency shift
    produced by the coupling is assumed to be renormalized away exactly.
    """
    if int(n) != n or n < 2:
        raise ParameterError(f"bath needs at least 2 oscillators, got {n}")
    if not (math.isfinite(omega_cutoff) and omega_cutoff > 0):
        raise ParameterError(f"omega_cutoff must be positive, got {omega_cutoff}")
    if omega_cutoff < 10 * params.omega0:
        warnings.warn(
            f"omega_cutoff={omega_cutoff:g} is below 10*omega0; the Ohmic limit is poor",
            stacklevel=2,
        )
    n = int(n)
    dw = omega_cutoff / n
    omegas = (np.arange(1, n + 1) - 0.5) * dw
    masses = np.ones(n)
    couplings = np.sqrt((2.0 * params.eta * params.M / math.pi) * masses * omegas**2 * dw)
    return BathDiscretization(masses, omegas, couplings, float(omega_cutoff))


def bath_coeff_arrays(params: ModelParams, omegas, couplings, t: float):
    """Vectorized b_j1(t), b_j2(t) for arrays of frequencies and couplings.

    The transient part reuses a1 and a2, which keeps the expressions real
    and valid in every damping regime.
    """
    omegas = np.asarray(omegas, dtype=float)
    couplings = np.asarray(couplings, dtype=float)
    a = coeffs(params, t)
    w0sq = params.omega0**2
    eta = params.eta
    detune = w0sq - omegas**2
    denom = detune**2 + (eta * omegas) ** 2
    if np.any((denom == 0) & (couplings != 0)):
        raise ParameterError("undamped resonance: bath frequency equals omega0 with eta = 0")
    safe = np.where(denom == 0, 1.0, denom)
    scale = -couplings / params.M / safe
    cos_t = np.cos(omegas * t)
    sin_t = np.sin(omegas * t)
    b1 = scale * (detune * cos_t + eta * omegas * sin_t
                  - detune * a.a1 - eta * omegas**2 * a.a2)
    b2 = scale * (detune * sin_t / omegas - eta * cos_t
                  + eta * a.a1 - detune * a.a2)
    return b1, b2


def bath_coeffs(params: ModelParams, osc: BathOscillator, t: float) -> tuple[float, float]:
    """Response coefficients (b1, b2) of a single bath oscillator at time t."""
    b1, b2 = bath_coeff_arrays(params, [osc.omega], [osc.c], t)
    return float(b1[0]), float(b2[0])


def thermal_factor(params: ModelParams, omegas, temperature: float) -> np.ndarray:
    """coth(hbar w / 2kT) with k = 1; identically 1 at zero temperature."""
    omegas = np.asarray(omegas, dtype=float)
    if temperature < 0 or not math.isfinite(temperature):
        raise ParameterError(f"temperature must be finite and >= 0, got {temperature}")
    if temperature == 0:
        return np.ones_like(omegas)
    with np.errstate(over="ignore"):
        x = params.hbar * omegas / (2.0 * temperature)
    return 1.0 / np.tanh(x)


def _mode_widths(params, bath, t, temperature):
    b1, b2 = bath_coeff_arrays(params, bath.omegas, bath.couplings, t)
    w = bath.omegas
    terms = 0.5 * (b1**2 + w**2 * b2**2) * params.hbar / (bath.masses * w)
    return terms * thermal_factor(params, w, temperature)


def sigma_xi_sq_sum(params: ModelParams, bath: BathDiscretization, t: float,
                    temperature: float = 0.0) -> BrownianWidth:
    """Brownian variance at time t by summing all bath modes.

    The sum is correctly rounded (``math.fsum``), so the result does not
    depend on the order in which modes are added.
    """
    if t < 0:
        raise ParameterError("t must be non-negative")
    terms = _mode_widths(params, bath, float(t), temperature)
    method = "sum" if temperature == 0 else "thermal-sum"
    return BrownianWidth(math.fsum(terms.tolist()), method, float(t))


def sigma_xi_sq_series(params: ModelParams, bath: BathDiscretization, times,
                       temperature: float = 0.0) -> np.ndarray:
    """sigma_xi_sq_sum evaluated at each entry of ``times``."""
    times = np.asarray(times, dtype=float)
    out = np.empty(times.shape)
    for idx, t in np.ndenumerate(times):
        out[idx] = sigma_xi_sq_sum(params, bath, float(t), temperature).sigma_xi_sq
    return out


def sigma_xi_sq_asymptotic(params: ModelParams, omega_cutoff: float | None = None) -> BrownianWidth:
    """Long-time Brownian variance of the continuum Ohmic bath.

    With u = w**2 the t -> inf width is (eta hbar / 2 pi M) times the
    integral of du / ((omega0**2 - u)**2 + eta**2 u).  Over [0, inf) this
    gives hbar/(2 pi omega M) (pi/2 + arctan((omega**2 - eta**2/4)/(eta omega))).
    Passing ``omega_cutoff`` integrates only up to that frequency, which is
    the limit a discretized bath with the same cutoff converges to.
    """
    if params.regime is not Regime.UNDERDAMPED:
        raise UnsupportedRegimeError(
            f"closed-form Brownian width needs an underdamped oscillator, "
            f"got {params.regime.value}")
    if params.eta == 0:
        raise UnsupportedRegimeError("closed-form Brownian width needs eta > 0")
    w = params.omega
    eta = params.eta
    u0 = w * w - eta * eta / 4.0
    scale = params.hbar / (2.0 * math.pi * w * params.M)
    upper = math.pi / 2.0
    if omega_cutoff is not None:
        upper = math.atan((omega_cutoff**2 - u0) / (eta * w))
    return BrownianWidth(scale * (upper + math.atan(u0 / (eta * w))),
                         "asymptotic-closed-form", math.inf)


def weak_damping_width(params: ModelParams) -> float:
    """hbar / (2 omega M), the eta << omega limit of the Brownian variance."""
    return params.hbar / (2.0 * params.omega * params.M)
