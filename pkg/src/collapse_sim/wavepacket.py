"""
Gaussian packet dynamics of the spin-1/2 oscillator.

The spin-up component of an initial ground-width packet at q = 0 moves
towards the well at q = +d, the spin-down component towards -d.  In the
shifted coordinate Q = q - s d the spatial factor is an exact Gaussian

    psi(Q, t) = exp(-A Q**2 + B Q + C)

whose parameters follow from a1(t), a2(t).  Its density has variance
sigma_Q**2 = sigma_q**2 (a1**2 + omega0**2 a2**2) and center -a1 s d.  The
bath convolves each branch with a zero-mean Gaussian of variance
sigma_xi**2, so the observable widths add in quadrature.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid
from scipy.special import ndtr

from .bath import BathDiscretization, sigma_xi_sq_asymptotic, sigma_xi_sq_series
from .errors import DegenerateWidthError, ParameterError, UnsupportedRegimeError
from .oscillator import ModelParams, Regime, coeffs

__all__ = [
    "BlochVector",
    "PacketState",
    "GridSpec",
    "DensityGrid",
    "WidthTable",
    "GaussianPacket",
    "sigma_Q_sq",
    "probability_weights",
    "packet_state",
    "branch_densities",
    "branch_window_masses",
    "density_grid",
    "grid_branch_masses",
    "width_curves",
    "gaussian_packet",
]

_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class BlochVector:
    """Pure spin state cos(theta/2)|+> + e^{i phi} sin(theta/2)|->."""

    theta: float
    phi: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.theta <= math.pi):
            raise ParameterError(f"theta must lie in [0, pi], got {self.theta}")
        if not (0.0 <= self.phi < 2.0 * math.pi):
            raise ParameterError(f"phi must lie in [0, 2 pi), got {self.phi}")

    @property
    def vector(self) -> np.ndarray:
        st = math.sin(self.theta)
        return np.array([st * math.cos(self.phi), st * math.sin(self.phi),
                         math.cos(self.theta)])


def probability_weights(spin: BlochVector) -> tuple[float, float]:
    """Born weights (cos^2(theta/2), sin^2(theta/2)) of the two wells.

    The azimuth phi never enters.
    """
    half = 0.5 * spin.theta
    return math.cos(half) ** 2, math.sin(half) ** 2


def _require_not_overdamped(params: ModelParams):
    if params.regime is Regime.OVERDAMPED:
        raise UnsupportedRegimeError("packet width closed form needs omega0 >= eta/2")


def sigma_Q_sq(params: ModelParams, t):
    """Packet variance without the bath.

    Evaluated as sigma_q**2 (a1**2 + omega0**2 a2**2), which equals
    sigma_q**2 (1 + eta^2/4w^2 + (eta/2w) sin 2wt - (eta^2/4w^2) cos 2wt) e^{-eta t}
    but stays finite at critical damping.
    """
    _require_not_overdamped(params)
    c = coeffs(params, t)
    return params.sigma_q_sq * (c.a1**2 + (params.omega0 * c.a2) ** 2)


@dataclass(frozen=True)
class PacketState:
    t: float
    center_plus: float
    center_minus: float
    sigma_Q_sq: float
    sigma_xi_sq: float
    sigma_Qxi_sq: float
    weight_plus: float
    weight_minus: float


def packet_state(params: ModelParams, spin: BlochVector, t: float,
                 sigma_xi_sq: float = 0.0) -> PacketState:
    if sigma_xi_sq < 0:
        raise ParameterError("sigma_xi_sq must be non-negative")
    a1 = coeffs(params, t).a1
    d = params.d
    sq = float(sigma_Q_sq(params, t))
    wp, wm = probability_weights(spin)
    return PacketState(
        t=float(t),
        center_plus=d - a1 * d,
        center_minus=-d + a1 * d,
        sigma_Q_sq=sq,
        sigma_xi_sq=float(sigma_xi_sq),
        sigma_Qxi_sq=sq + float(sigma_xi_sq),
        weight_plus=wp,
        weight_minus=wm,
    )


def _normal_pdf(q, center, var):
    z = (q - center) ** 2 / (2.0 * var)
    return np.exp(-z) / (_SQRT_2PI * math.sqrt(var))


def _normal_cell_average(q, center, var, h):
    """Mean of the normal density over [q - h/2, q + h/2]."""
    s = math.sqrt(var)
    lo = (q - 0.5 * h - center) / s
    hi = (q + 0.5 * h - center) / s
    # subtract upper tails on the right of the center to avoid 1 - 1
    right = lo > 0
    mass = np.where(right, ndtr(-lo) - ndtr(-hi), ndtr(hi) - ndtr(lo))
    return mass / h


def branch_densities(params: ModelParams, spin: BlochVector, sigma_xi_sq: float,
                     q, t: float):
    """Densities |Psi_+|^2 and |Psi_-|^2 at positions ``q`` and time ``t``."""
    state = packet_state(params, spin, t, sigma_xi_sq)
    var = state.sigma_Qxi_sq
    if not var > 0:
        raise DegenerateWidthError(f"total width vanishes at t={t}")
    q = np.asarray(q, dtype=float)
    rho_plus = state.weight_plus * _normal_pdf(q, state.center_plus, var)
    rho_minus = state.weight_minus * _normal_pdf(q, state.center_minus, var)
    return rho_plus, rho_minus


def branch_window_masses(params: ModelParams, spin: BlochVector, sigma_xi_sq: float,
                         t: float, q_lo: float = -math.inf, q_hi: float = math.inf):
    """Exact probability of each branch inside [q_lo, q_hi]."""
    state = packet_state(params, spin, t, sigma_xi_sq)
    var = state.sigma_Qxi_sq
    if not var > 0:
        raise DegenerateWidthError(f"total width vanishes at t={t}")
    s = math.sqrt(var)

    def mass(center):
        lo = (q_lo - center) / s
        hi = (q_hi - center) / s
        if lo > 0:
            return float(ndtr(-lo) - ndtr(-hi))
        return float(ndtr(hi) - ndtr(lo))

    return state.weight_plus * mass(state.center_plus), \
        state.weight_minus * mass(state.center_minus)


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid of ``num`` points from ``start`` to ``stop`` inclusive."""

    start: float
    stop: float
    num: int

    def __post_init__(self):
        if self.num < 1:
            raise ParameterError("grid needs at least one point")
        if self.num > 1 and not self.stop > self.start:
            raise ParameterError("grid stop must exceed start")

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.num)

    @property
    def step(self) -> float:
        return (self.stop - self.start) / (self.num - 1) if self.num > 1 else 0.0


@dataclass(frozen=True, eq=False)
class DensityGrid:
    """Branch densities on a (t, q) grid; arrays have shape (len(t), len(q)).

    ``sampling`` is ``"point"`` for pointwise samples or ``"cell"`` for
    averages over the cell of width dq centered on each q.
    """

    q_axis: np.ndarray
    t_axis: np.ndarray
    rho_plus: np.ndarray
    rho_minus: np.ndarray
    sigma_xi_sq: np.ndarray
    sampling: str = "point"

    @property
    def rho_total(self) -> np.ndarray:
        return self.rho_plus + self.rho_minus


def _brownian_variances(params, brownian, times, include_brownian, temperature):
    if not include_brownian or brownian is None:
        return np.zeros_like(times)
    if isinstance(brownian, BathDiscretization):
        return sigma_xi_sq_series(params, brownian, times, temperature)
    if brownian == "asymptotic":
        if temperature != 0:
            raise ParameterError("the asymptotic width is only available at T = 0")
        return np.full_like(times, sigma_xi_sq_asymptotic(params).sigma_xi_sq)
    raise ParameterError(f"unknown Brownian source {brownian!r}")


def density_grid(params: ModelParams, spin: BlochVector, brownian, q_spec: GridSpec,
                 t_spec, include_brownian: bool = True, sampling: str = "point",
                 temperature: float = 0.0, workers: int = 1) -> DensityGrid:
    """Evaluate both branch densities over a full (t, q) grid.

    Parameters
    ----------
    brownian : BathDiscretization, "asymptotic" or None
        Source of the Brownian variance.  A bath gives the time-dependent
        mode sum; "asymptotic" uses the t -> inf closed form at every t.
    t_spec : GridSpec or sequence of float
        Times; an explicit sequence need not be uniform.
    sampling : {"point", "cell"}
        "cell" stores cell averages, which keeps column masses exact even
        when a packet is narrower than the q spacing.
    workers : int
        Columns are split across this many threads.  The output does not
        depend on the value.
    """
    if sampling not in ("point", "cell"):
        raise ParameterError(f"unknown sampling {sampling!r}")
    q = q_spec.values()
    times = t_spec.values() if isinstance(t_spec, GridSpec) else np.asarray(t_spec, float)
    if times.ndim != 1 or len(times) == 0:
        raise ParameterError("time grid must be a non-empty 1-d sequence")
    if sampling == "cell" and q_spec.num < 2:
        raise ParameterError("cell sampling needs at least two q points")
    var_xi = _brownian_variances(params, brownian, times, include_brownian, temperature)
    rho_plus = np.empty((len(times), len(q)))
    rho_minus = np.empty_like(rho_plus)
    h = q_spec.step

    def column(i):
        state = packet_state(params, spin, float(times[i]), float(var_xi[i]))
        var = state.sigma_Qxi_sq
        if not var > 0:
            raise DegenerateWidthError(f"total width vanishes at t={times[i]}")
        if sampling == "point":
            rho_plus[i] = state.weight_plus * _normal_pdf(q, state.center_plus, var)
            rho_minus[i] = state.weight_minus * _normal_pdf(q, state.center_minus, var)
        else:
            rho_plus[i] = state.weight_plus * _normal_cell_average(q, state.center_plus, var, h)
            rho_minus[i] = state.weight_minus * _normal_cell_average(q, state.center_minus, var, h)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(column, range(len(times))))
    else:
        for i in range(len(times)):
            column(i)
    return DensityGrid(q, times, rho_plus, rho_minus, var_xi, sampling)


def grid_branch_masses(grid: DensityGrid):
    """Per-column masses (plus, minus, total) by the trapezoid rule."""
    mp = trapezoid(grid.rho_plus, grid.q_axis, axis=1)
    mm = trapezoid(grid.rho_minus, grid.q_axis, axis=1)
    return mp, mm, mp + mm


@dataclass(frozen=True, eq=False)
class WidthTable:
    t: np.ndarray
    sigma_Q: np.ndarray
    sigma_xi: np.ndarray
    sigma_Qxi: np.ndarray


def width_curves(params: ModelParams, brownian, t_spec, temperature: float = 0.0) -> WidthTable:
    """Tabulate sigma_Q, sigma_xi and sigma_Qxi = sqrt(sigma_Q^2 + sigma_xi^2)."""
    times = t_spec.values() if isinstance(t_spec, GridSpec) else np.asarray(t_spec, float)
    sq = np.asarray(sigma_Q_sq(params, times), dtype=float)
    sx = _brownian_variances(params, brownian, times, True, temperature)
    return WidthTable(times, np.sqrt(sq), np.sqrt(sx), np.sqrt(sq + sx))


@dataclass(frozen=True)
class GaussianPacket:
    """log psi(Q) = -A Q**2 + B Q + C at one instant, in the shifted frame."""

    A: complex
    B: complex
    C: complex

    def __call__(self, Q):
        Q = np.asarray(Q, dtype=float)
        return np.exp(-self.A * Q * Q + self.B * Q + self.C)


def _unwrapped_log(params: ModelParams, t: float, a1: float, a2: float) -> complex:
    """Continuous-in-time log(a1 + i omega0 a2), starting from 0 at t = 0."""
    w0 = params.omega0
    modulus = math.log(math.hypot(a1, w0 * a2))
    if params.regime is Regime.UNDERDAMPED:
        w = params.omega
        h = 0.5 * params.eta
        x = w * t
        # the point a1 + i w0 a2 winds once around the origin per 2 pi / w
        delta = math.atan2(h, w)
        n = round((x - delta) / math.pi)
        den = w * math.cos(x) + h * math.sin(x)
        num = w0 * math.sin(x)
        if den == 0:
            arg = (math.floor((x - delta) / math.pi) + 0.5) * math.pi
        else:
            arg = n * math.pi + math.atan(num / den)
    else:
        arg = math.atan2(w0 * a2, a1)
    return complex(modulus, arg)


def gaussian_packet(params: ModelParams, t: float, sigma_z: int = 1) -> GaussianPacket:
    """Closed-form packet for an initial ground-width Gaussian at q = 0.

    The result solves the damped-oscillator Schrodinger equation with
    Hamiltonian e^{-eta t} P^2/2M + (1/2) M e^{eta t} omega0^2 Q^2 in the
    coordinate Q = q - sigma_z d.
    """
    if sigma_z not in (1, -1):
        raise ParameterError("sigma_z must be +1 or -1")
    c = coeffs(params, t)
    w0 = params.omega0
    k = params.M * w0 / params.hbar
    shift = sigma_z * params.d
    z = complex(c.a1, w0 * c.a2)
    A = 0.5 * k * math.exp(params.eta * t) * complex(w0 * c.a2, -c.a2dot) / complex(w0 * c.a2, -c.a1)
    B = -k * shift / z
    C = 0.25 * math.log(k / math.pi) - 0.5 * _unwrapped_log(params, t, c.a1, c.a2) \
        - 0.5 * k * c.a1 * shift**2 / z
    return GaussianPacket(A, B, C)
