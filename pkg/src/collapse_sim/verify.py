"""
Independent numerical oracles for the closed forms.

Nothing in here is used to produce results; the functions only check
them: adaptive ODE integration of the Langevin equation, quadrature of
the Brownian-width integrals, a finite-difference residual of the damped
Schrodinger equation, windowed orthonormality of the Q(t) eigenfunctions
and a brute-force Gaussian convolution.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import integrate
from scipy.signal.windows import tukey

from .bath import bath_coeff_arrays, thermal_factor
from .errors import OracleFailure, ParameterError, SingularEigenbasisError
from .oscillator import ModelParams, coeffs
from .wavepacket import gaussian_packet

__all__ = [
    "Forcing",
    "Trajectory",
    "ResidualReport",
    "ode_oracle",
    "coefficient_errors",
    "bath_coefficient_errors",
    "brownian_width_quadrature",
    "asymptote_quadrature",
    "schrodinger_residual",
    "residual_refinement",
    "eigenfunction",
    "eigenfunction_overlap",
    "eigenfunction_orthonormality",
    "convolve_gaussian",
    "run_oracle_suite",
]

ODE_RTOL = 1e-12


@dataclass(frozen=True)
class Forcing:
    """Right-hand side f(t) of q'' + eta q' + omega0^2 q = f(t).

    kind is one of "none", "constant", "cos" (amplitude cos(omega t)) or
    "sin" (amplitude sin(omega t) / omega).
    """

    kind: str = "none"
    amplitude: float = 1.0
    omega: float | None = None

    def __post_init__(self):
        if self.kind not in ("none", "constant", "cos", "sin"):
            raise ParameterError(f"unknown forcing kind {self.kind!r}")
        if self.kind in ("cos", "sin") and not (self.omega and self.omega > 0):
            raise ParameterError("oscillating forcing needs a positive omega")

    def __call__(self, t: float) -> float:
        if self.kind == "none":
            return 0.0
        if self.kind == "constant":
            return self.amplitude
        if self.kind == "cos":
            return self.amplitude * math.cos(self.omega * t)
        return self.amplitude * math.sin(self.omega * t) / self.omega


@dataclass(frozen=True, eq=False)
class Trajectory:
    t: np.ndarray
    q: np.ndarray
    qdot: np.ndarray
    error_estimate: float


def _integrate(params, forcing, t_grid, y0, rtol):
    eta, w0sq = params.eta, params.omega0**2

    def rhs(t, y):
        return [y[1], forcing(t) - eta * y[1] - w0sq * y[0]]

    sol = integrate.solve_ivp(rhs, (0.0, float(t_grid[-1])), list(y0), method="DOP853",
                              t_eval=t_grid, rtol=rtol, atol=rtol * 1e-3)
    if not sol.success:
        raise OracleFailure(f"ODE integration failed: {sol.message}")
    return sol.y


def ode_oracle(params: ModelParams, forcing: Forcing, t_grid, y0=(1.0, 0.0),
               rtol: float = ODE_RTOL, max_error: float = 1e-9) -> Trajectory:
    """Integrate the Langevin equation adaptively at local tolerance ``rtol``.

    A second pass at ten times the tolerance estimates the global error;
    if the estimate exceeds ``max_error`` an OracleFailure is raised
    rather than returning a degraded trajectory.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or len(t_grid) == 0 or t_grid[0] < 0 or np.any(np.diff(t_grid) <= 0):
        raise ParameterError("t_grid must be non-empty, non-negative and increasing")
    fine = _integrate(params, forcing, t_grid, y0, rtol)
    coarse = _integrate(params, forcing, t_grid, y0, rtol * 10)
    err = float(np.max(np.abs(fine - coarse)))
    if not err <= max_error:
        raise OracleFailure(f"ODE oracle error estimate {err:.3g} exceeds {max_error:.3g}")
    return Trajectory(t_grid, fine[0], fine[1], err)


def coefficient_errors(params: ModelParams, t_grid) -> dict:
    """Max absolute deviation of a1, a2 (and derivatives) from the ODE oracle."""
    t_grid = np.asarray(t_grid, dtype=float)
    c = coeffs(params, t_grid)
    one = ode_oracle(params, Forcing("none"), t_grid, (1.0, 0.0))
    two = ode_oracle(params, Forcing("none"), t_grid, (0.0, 1.0))
    return {
        "a1": float(np.max(np.abs(c.a1 - one.q))),
        "a1dot": float(np.max(np.abs(c.a1dot - one.qdot))),
        "a2": float(np.max(np.abs(c.a2 - two.q))),
        "a2dot": float(np.max(np.abs(c.a2dot - two.qdot))),
    }


def bath_coefficient_errors(params: ModelParams, omega_j: float, c_j: float, t_grid) -> dict:
    """Max absolute deviation of b_j1, b_j2 from driven-oscillator integrations."""
    t_grid = np.asarray(t_grid, dtype=float)
    amp = -c_j / params.M
    b1_ode = ode_oracle(params, Forcing("cos", amp, omega_j), t_grid, (0.0, 0.0)).q
    b2_ode = ode_oracle(params, Forcing("sin", amp, omega_j), t_grid, (0.0, 0.0)).q
    b1 = np.empty_like(t_grid)
    b2 = np.empty_like(t_grid)
    for i, t in enumerate(t_grid):
        x, y = bath_coeff_arrays(params, [omega_j], [c_j], float(t))
        b1[i], b2[i] = x[0], y[0]
    return {"b1": float(np.max(np.abs(b1 - b1_ode))),
            "b2": float(np.max(np.abs(b2 - b2_ode)))}


def brownian_width_quadrature(params: ModelParams, t: float, omega_cutoff: float = math.inf,
                              temperature: float = 0.0) -> float:
    """Continuum Brownian variance at time t by adaptive quadrature over frequency.

    For an Ohmic bath the mode sum becomes
    (eta hbar / pi M) * integral of w (beta1^2 + w^2 beta2^2) coth(hbar w / 2kT) dw,
    where beta are the bath coefficients for unit c_j / M.
    """

    def integrand(w):
        b1, b2 = bath_coeff_arrays(params, [w], [params.M], t)
        f = float(b1[0] ** 2 + w * w * b2[0] ** 2)
        return w * f * float(thermal_factor(params, [w], temperature)[0])

    upper = omega_cutoff if math.isfinite(omega_cutoff) else 200.0 * params.omega0
    points = [params.omega0] if params.omega0 < upper else None
    val, _ = integrate.quad(integrand, 0.0, upper, points=points, limit=2000,
                            epsabs=0.0, epsrel=1e-10)
    if not math.isfinite(omega_cutoff):
        # the integrand falls off as 1/w^3 beyond the resonance
        tail, _ = integrate.quad(integrand, upper, math.inf, limit=2000)
        val += tail
    return params.eta * params.hbar / (math.pi * params.M) * val


def asymptote_quadrature(params: ModelParams) -> float:
    """(eta hbar / 2 pi M) * integral over u = w^2 of du / ((omega0^2 - u)^2 + eta^2 u)."""
    w0sq = params.omega0**2
    eta = params.eta

    def f(u):
        return 1.0 / ((w0sq - u) ** 2 + eta * eta * u)

    head, _ = integrate.quad(f, 0.0, 2 * w0sq, points=[w0sq], epsabs=0.0, epsrel=1e-12,
                             limit=500)
    tail, _ = integrate.quad(f, 2 * w0sq, math.inf, epsabs=0.0, epsrel=1e-12, limit=500)
    return eta * params.hbar / (2 * math.pi * params.M) * (head + tail)


@dataclass(frozen=True)
class ResidualReport:
    grid_h: float
    grid_dt: float
    residual_l2: float
    order_estimate: float
    flagged: bool

    def to_dict(self) -> dict:
        return asdict(self)


def _residual_norms(params, times, h, dt, sigma_z, n_sigma):
    hbar, M = params.hbar, params.M
    num = 0.0
    den = 0.0
    for t in times:
        if t - dt < 0:
            raise ParameterError("residual times must exceed dt")
        now = gaussian_packet(params, t, sigma_z)
        before = gaussian_packet(params, t - dt, sigma_z)
        after = gaussian_packet(params, t + dt, sigma_z)
        var = 1.0 / (4.0 * now.A.real)
        center = now.B.real / (2.0 * now.A.real)
        k = math.ceil(n_sigma * math.sqrt(var) / h)
        Q = center + h * np.arange(-k, k + 1)
        psi = now(Q)
        dpsi_dt = (after(Q) - before(Q)) / (2.0 * dt)
        lap = (now(Q + h) - 2.0 * psi + now(Q - h)) / (h * h)
        H_psi = (-math.exp(-params.eta * t) * hbar**2 / (2 * M) * lap
                 + 0.5 * M * math.exp(params.eta * t) * params.omega0**2 * Q * Q * psi)
        resid = 1j * hbar * dpsi_dt - H_psi
        num += h * float(np.sum(np.abs(resid) ** 2))
        den += h * float(np.sum(np.abs(H_psi) ** 2))
    return math.sqrt(num / den)


def residual_refinement(params: ModelParams, times, h: float, dt: float, levels: int = 3,
                        sigma_z: int = 1, n_sigma: float = 8.0) -> list[ResidualReport]:
    """Residuals at ``levels`` grids, halving h and dt each time.

    Each report's order estimate compares it with the next finer level;
    the finest level repeats the previous estimate.
    """
    if levels < 2:
        raise ParameterError("need at least two grid levels")
    norms = [_residual_norms(params, times, h / 2**i, dt / 2**i, sigma_z, n_sigma)
             for i in range(levels)]
    orders = [math.log2(norms[i] / norms[i + 1]) for i in range(levels - 1)]
    orders.append(orders[-1])
    return [ResidualReport(h / 2**i, dt / 2**i, norms[i], orders[i], norms[i] > 0.1)
            for i in range(levels)]


def schrodinger_residual(params: ModelParams, times, h: float, dt: float, sigma_z: int = 1,
                         n_sigma: float = 8.0) -> ResidualReport:
    """Finite-difference residual of the closed-form packet on the (h, dt) grid.

    The operator is i hbar d/dt - e^{-eta t} P^2/2M - M e^{eta t} omega0^2 Q^2/2,
    with centered second-order differences in both Q and t.  The order
    estimate comes from repeating the calculation at (h/2, dt/2).
    """
    return residual_refinement(params, times, h, dt, 2, sigma_z, n_sigma)[0]


def _check_eigenbasis(params, t):
    c = coeffs(params, t)
    if abs(params.omega0 * c.a2) * math.exp(0.5 * params.eta * t) < 1e-9:
        raise SingularEigenbasisError(f"a2({t}) vanishes; Q(t) eigenfunctions are singular")
    return c


def eigenfunction(params: ModelParams, t: float, Q1: float, Q0):
    """Eigenfunction of Q(t) = a1 Q0 + a2 Qdot0 with eigenvalue Q1, in the Q0 basis.

    Delta-normalized with |C|^2 = M / (2 pi hbar |a2|) and zero phase.
    """
    c = _check_eigenbasis(params, t)
    Q0 = np.asarray(Q0, dtype=float)
    k = params.M / (2.0 * params.hbar * c.a2)
    amp = math.sqrt(params.M / (2.0 * math.pi * params.hbar * abs(c.a2)))
    return amp * np.exp(-1j * k * (c.a1 * Q0 * Q0 - 2.0 * Q1 * Q0))


def eigenfunction_overlap(params: ModelParams, t: float, Q1: float, Q2: float, q0_grid,
                          taper: float = 0.5) -> complex:
    """Tukey-windowed overlap of u_{Q2}* u_{Q1} over the Q0 grid."""
    q0 = np.asarray(q0_grid, dtype=float)
    c = _check_eigenbasis(params, t)
    step = q0[1] - q0[0]
    slope = params.M / (params.hbar * abs(c.a2)) * (abs(c.a1) * np.max(np.abs(q0))
                                                      + max(abs(Q1), abs(Q2)))
    if slope * step > math.pi / 2:
        raise ParameterError("q0 grid is too coarse for the eigenfunction phase")
    w = tukey(len(q0), taper)
    f = w * np.conj(eigenfunction(params, t, Q2, q0)) * eigenfunction(params, t, Q1, q0)
    return complex(integrate.trapezoid(f, q0))


def eigenfunction_orthonormality(params: ModelParams, t: float, Q1_list, q0_grid,
                                 taper: float = 0.5) -> float:
    """Largest |<u_Qi|u_Qj>| over i != j, relative to the diagonal overlap."""
    Q1_list = list(Q1_list)
    if len(Q1_list) < 2:
        raise ParameterError("need at least two eigenvalues")
    diag = abs(eigenfunction_overlap(params, t, Q1_list[0], Q1_list[0], q0_grid, taper))
    worst = 0.0
    for i, qa in enumerate(Q1_list):
        for qb in Q1_list[i + 1:]:
            worst = max(worst, abs(eigenfunction_overlap(params, t, qa, qb, q0_grid, taper)))
    return worst / diag


def convolve_gaussian(q, f, variance: float, n_sigma: float = 12.0) -> np.ndarray:
    """Trapezoid convolution of samples f(q) with a zero-mean normal kernel.

    ``q`` must be uniform and f must vanish beyond its ends.
    """
    q = np.asarray(q, dtype=float)
    f = np.asarray(f, dtype=float)
    h = q[1] - q[0]
    if not np.allclose(np.diff(q), h, rtol=1e-9, atol=0):
        raise ParameterError("convolution grid must be uniform")
    if variance <= 0:
        return f.copy()
    s = math.sqrt(variance)
    m = math.ceil(n_sigma * s / h)
    xi = h * np.arange(-m, m + 1)
    kernel = np.exp(-xi * xi / (2 * variance)) / (math.sqrt(2 * math.pi) * s)
    return h * np.convolve(f, kernel, mode="same")


def run_oracle_suite(params: ModelParams | None = None) -> dict:
    """Run the default battery of oracle checks and return a JSON-able report."""
    from .bath import build_ohmic_bath, sigma_xi_sq_asymptotic, sigma_xi_sq_sum
    from .oscillator import FIG1_PARAMS, wronskian
    from .wavepacket import BlochVector, branch_densities

    p = params or FIG1_PARAMS
    report: dict = {"params": {"M": p.M, "omega0": p.omega0, "eta": p.eta, "B": p.B,
                               "hbar": p.hbar}}
    t_grid = np.linspace(0.0, 10.0, 201)
    report["coefficients"] = coefficient_errors(p, t_grid)
    report["bath_coefficients"] = bath_coefficient_errors(p, 1.0, 1.0, np.linspace(0, 3, 61))

    tw = np.concatenate([[0.0], np.geomspace(1e-6, 20 / max(p.eta, p.omega0), 999)])
    report["wronskian_max_rel_error"] = float(np.max(np.abs(wronskian(p, tw) * np.exp(p.eta * tw) - 1)))

    bath = build_ohmic_bath(p, 4096, 50 * p.omega0)
    t_late = 20 / p.eta if p.eta > 0 else 10.0
    s_sum = sigma_xi_sq_sum(p, bath, t_late).sigma_xi_sq
    s_quad = brownian_width_quadrature(p, t_late, 50 * p.omega0)
    report["brownian_sum_vs_quadrature"] = {"t": t_late, "sum": s_sum, "quadrature": s_quad,
                                            "rel_error": abs(s_sum / s_quad - 1)}
    try:
        s_inf = sigma_xi_sq_asymptotic(p).sigma_xi_sq
        s_inf_quad = asymptote_quadrature(p)
        report["asymptote_vs_quadrature"] = {"closed_form": s_inf, "quadrature": s_inf_quad,
                                             "rel_error": abs(s_inf / s_inf_quad - 1)}
    except Exception as exc:  # unsupported regime is reported, not fatal
        report["asymptote_vs_quadrature"] = {"skipped": str(exc)}

    times = np.linspace(0.5, 1.5, 5)
    report["schrodinger_residual"] = {
        "B=0": [r.to_dict() for r in residual_refinement(p.replace(B=0.0), times, 0.01, 1e-4)],
        "B!=0": [r.to_dict() for r in residual_refinement(p, times, 0.01, 1e-4)],
    }

    t_c = 2.0
    var_xi = sigma_xi_sq_sum(p, bath, t_c).sigma_xi_sq
    q = np.linspace(-8, 8, 8001)
    spin = BlochVector(math.pi / 4)
    bare = sum(branch_densities(p, spin, 0.0, q, t_c))
    wide = sum(branch_densities(p, spin, var_xi, q, t_c))
    report["convolution_linf"] = float(np.max(np.abs(convolve_gaussian(q, bare, var_xi) - wide)))

    t_e = 0.3
    c = coeffs(p, t_e)
    q0 = np.linspace(-20, 20, 40001)
    report["eigenfunction_offdiag_ratio"] = eigenfunction_orthonormality(
        p, t_e, [0.0, 5.0 * abs(c.a2), 10.0 * abs(c.a2)], q0)
    return report
