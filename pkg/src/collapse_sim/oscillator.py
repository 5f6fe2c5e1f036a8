"""
Homogeneous solutions of the damped oscillator

    q'' + eta q' + omega0**2 q = 0

expressed through the two fundamental solutions a1(t), a2(t) with
a1(0) = 1, a1'(0) = 0, a2(0) = 0, a2'(0) = 1.  Writing h = eta/2 and
omega = sqrt(omega0**2 - h**2),

    a1 = e^{-h t} (cos(omega t) + h sin(omega t) / omega)
    a2 = e^{-h t} sin(omega t) / omega
    a1' = -omega0**2 a2
    a2' = e^{-h t} (cos(omega t) - h sin(omega t) / omega)

For an overdamped oscillator omega is imaginary and the trigonometric
functions turn into hyperbolic ones.  Close to critical damping
(|omega| t < 1e-4) a power series in omega**2 t**2 is used instead.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

__all__ = [
    "Regime",
    "ModelParams",
    "CoeffPair",
    "coeffs",
    "wronskian",
    "displacement",
    "FIG1_PARAMS",
]

# |omega0**2 - eta**2/4| below this fraction of omega0**2 is tagged critical
CRITICAL_REL_TOL = 1e-8
# series branch is used where (omega t)**2 is below this
SERIES_X_MAX = 1e-8


class Regime(enum.Enum):
    UNDERDAMPED = "underdamped"
    CRITICAL = "critical"
    OVERDAMPED = "overdamped"


@dataclass(frozen=True)
class ModelParams:
    """Physical constants of the main oscillator and its magnetic coupling.

    Parameters
    ----------
    M : float
        Mass of the main oscillator.
    omega0 : float
        Renormalized oscillator frequency.
    eta : float
        Ohmic damping rate.
    B : float
        Magnetic force per unit mass; the wells sit at +-B/omega0**2.
    hbar : float
        Reduced Planck constant in the chosen unit system.
    """

    M: float = 1.0
    omega0: float = 1.0
    eta: float = 0.0
    B: float = 0.0
    hbar: float = 1.0

    def __post_init__(self):
        for name in ("M", "omega0", "eta", "B", "hbar"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ParameterError(f"{name} must be finite, got {value!r}")
        if self.M <= 0:
            raise ParameterError(f"M must be positive, got {self.M}")
        if self.omega0 <= 0:
            raise ParameterError(f"omega0 must be positive, got {self.omega0}")
        if self.hbar <= 0:
            raise ParameterError(f"hbar must be positive, got {self.hbar}")
        if self.eta < 0:
            raise ParameterError(f"eta must be non-negative, got {self.eta}")
        if not math.isfinite(self.B / self.omega0**2):
            raise ParameterError("displacement B/omega0**2 overflows")

    @classmethod
    def from_displacement(cls, d: float, *, M=1.0, omega0=1.0, eta=0.0,
                          hbar=1.0) -> "ModelParams":
        """Build parameters whose wells sit at +-d."""
        return cls(M=M, omega0=omega0, eta=eta, B=d * omega0**2, hbar=hbar)

    def replace(self, **changes) -> "ModelParams":
        values = {k: getattr(self, k) for k in ("M", "omega0", "eta", "B", "hbar")}
        values.update(changes)
        return ModelParams(**values)

    @property
    def d(self) -> float:
        return self.B / self.omega0**2

    @property
    def omega_sq(self) -> float:
        """omega0**2 - eta**2/4, factored to limit cancellation near critical."""
        h = 0.5 * self.eta
        return (self.omega0 - h) * (self.omega0 + h)

    @property
    def omega(self) -> float:
        """Damped frequency; raises for overdamped parameters."""
        w2 = self.omega_sq
        if w2 < 0:
            raise ParameterError("omega is imaginary for overdamped parameters")
        return math.sqrt(w2)

    @property
    def regime(self) -> Regime:
        w2 = self.omega_sq
        if abs(w2) < CRITICAL_REL_TOL * self.omega0**2:
            return Regime.CRITICAL
        return Regime.UNDERDAMPED if w2 > 0 else Regime.OVERDAMPED

    @property
    def sigma_q_sq(self) -> float:
        """Ground-state position variance hbar / (2 M omega0)."""
        return self.hbar / (2.0 * self.M * self.omega0)


#: hbar = M = 1, period 1 (omega0 = 2 pi), eta = 2 and wells at d = 3.
FIG1_PARAMS = ModelParams.from_displacement(3.0, M=1.0, omega0=2 * math.pi,
                                            eta=2.0, hbar=1.0)


@dataclass(frozen=True)
class CoeffPair:
    """a1, a2 and their time derivatives at one or more times."""

    a1: np.ndarray | float
    a2: np.ndarray | float
    a1dot: np.ndarray | float
    a2dot: np.ndarray | float


def _check_times(t):
    t = np.asarray(t, dtype=float)
    if np.any(~np.isfinite(t)):
        raise ParameterError("times must be finite")
    if np.any(t < 0):
        raise ParameterError("times must be non-negative")
    return t


def _damped_cos_sinc(params: ModelParams, t: np.ndarray):
    """Return C = e^{-ht} cos(omega t) and S = e^{-ht} sin(omega t)/omega.

    Both stay real for every regime.
    """
    h = 0.5 * params.eta
    w2 = params.omega_sq
    x = w2 * t * t
    series = np.abs(x) < SERIES_X_MAX

    C = np.empty_like(t)
    S = np.empty_like(t)

    if np.any(series):
        ts = t[series]
        xs = x[series]
        e = np.exp(-h * ts)
        # cos(sqrt x) and sin(sqrt x)/sqrt x; x < 0 gives cosh and sinh
        cos_s = 1.0 - xs / 2.0 + xs * xs / 24.0 - xs**3 / 720.0
        sinc_s = 1.0 - xs / 6.0 + xs * xs / 120.0 - xs**3 / 5040.0
        C[series] = e * cos_s
        S[series] = e * ts * sinc_s

    rest = ~series
    if np.any(rest):
        tr = t[rest]
        if w2 > 0:
            w = math.sqrt(w2)
            e = np.exp(-h * tr)
            C[rest] = e * np.cos(w * tr)
            S[rest] = e * np.sin(w * tr) / w
        else:
            k = math.sqrt(-w2)
            slow = np.exp((k - h) * tr)
            fast = np.exp(-(k + h) * tr)
            # expm1 keeps the difference exact when k t is small
            small = 2.0 * k * tr < 1.0
            em1 = np.expm1(2.0 * k * np.where(small, tr, 0.0))
            C[rest] = np.where(small, fast * (1.0 + 0.5 * em1), 0.5 * (slow + fast))
            S[rest] = np.where(small, fast * em1 / (2.0 * k), (slow - fast) / (2.0 * k))
    return C, S


def coeffs(params: ModelParams, t) -> CoeffPair:
    """Evaluate a1, a2, a1', a2' at time(s) ``t >= 0``.

    Scalar input gives float fields; array input gives arrays of the same
    shape.
    """
    t_arr = _check_times(t)
    scalar = t_arr.ndim == 0
    tt = np.atleast_1d(t_arr)
    C, S = _damped_cos_sinc(params, tt)
    h = 0.5 * params.eta
    a1 = C + h * S
    a2 = S
    a1dot = -params.omega0**2 * S
    a2dot = C - h * S
    if scalar:
        return CoeffPair(float(a1[0]), float(a2[0]), float(a1dot[0]), float(a2dot[0]))
    shape = t_arr.shape
    return CoeffPair(a1.reshape(shape), a2.reshape(shape),
                     a1dot.reshape(shape), a2dot.reshape(shape))


def wronskian(params: ModelParams, t):
    """a1 a2' - a1' a2, which should equal exp(-eta t)."""
    c = coeffs(params, t)
    return c.a1 * c.a2dot - c.a1dot * c.a2


def displacement(params: ModelParams) -> float:
    """Well displacement d = B / omega0**2."""
    return params.d
