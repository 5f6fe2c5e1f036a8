"""
Bell's three-setting inequality |P(a,b) - P(a,c)| <= 1 + P(b,c).

Quantum correlations of the spin singlet are compared against an
illustrative local model in which a hidden unit vector lambda fixes both
outcomes: A(v, lambda) = sign(v . lambda) and B(v, lambda) = -A(v, lambda).
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ParameterError
from .wavepacket import BlochVector, probability_weights

__all__ = [
    "BellReport",
    "setting",
    "planar_setting",
    "quantum_correlation",
    "correlation_from_weights",
    "bell_check",
    "classical_bound_monte_carlo",
]

UNIT_TOL = 1e-12
VIOLATION_TOL = 1e-12
MC_CHUNK = 1 << 16


def setting(v) -> np.ndarray:
    """Validate a detector setting as a unit 3-vector."""
    v = np.asarray(v, dtype=float)
    if v.shape != (3,) or not np.all(np.isfinite(v)):
        raise ParameterError("a setting is a finite 3-vector")
    if abs(np.linalg.norm(v) - 1.0) > UNIT_TOL:
        raise ParameterError(f"setting {v} is not a unit vector")
    return v


def planar_setting(angle: float) -> np.ndarray:
    """Unit vector at ``angle`` in the x-z plane, measured from z."""
    return np.array([math.sin(angle), 0.0, math.cos(angle)])


def _angle(a, b) -> float:
    # atan2 form stays accurate for nearly parallel settings
    return math.atan2(np.linalg.norm(np.cross(a, b)), float(np.dot(a, b)))


def quantum_correlation(a, b) -> float:
    """Singlet correlation E(a, b) = -a . b."""
    return -float(np.dot(setting(a), setting(b)))


def correlation_from_weights(a, b) -> float:
    """Singlet correlation rebuilt from Born weights at the relative angle.

    Once particle 1 reads +1 along a, particle 2 points along -a, so its
    result along b is +1 with probability sin^2(theta_ab/2).
    """
    theta = _angle(setting(a), setting(b))
    p_plus, p_minus = probability_weights(BlochVector(theta))
    return -(p_plus - p_minus)


@dataclass(frozen=True)
class BellReport:
    P_ab: float
    P_ac: float
    P_bc: float
    lhs: float
    rhs: float
    violated: bool
    stderr: float | None = None
    n: int | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def _report(P_ab, P_ac, P_bc, stderr=None, n=None) -> BellReport:
    lhs = abs(P_ab - P_ac)
    rhs = 1.0 + P_bc
    return BellReport(P_ab, P_ac, P_bc, lhs, rhs, lhs > rhs + VIOLATION_TOL, stderr, n)


def bell_check(a, b, c) -> BellReport:
    """Evaluate the inequality with quantum singlet correlations."""
    return _report(quantum_correlation(a, b), quantum_correlation(a, c),
                   quantum_correlation(b, c))


def classical_bound_monte_carlo(a, b, c, n: int, seed: int = 0) -> BellReport:
    """Estimate the correlations of the sign model by sampling lambda on the sphere.

    Samples are drawn in fixed chunks, each from its own child stream of
    ``seed``, so the result depends only on ``n`` and ``seed``.  ``stderr``
    is the standard error of lhs - rhs.
    """
    a, b, c = setting(a), setting(b), setting(c)
    if int(n) != n or n < 1:
        raise ParameterError("n must be a positive integer")
    n = int(n)
    n_chunks = -(-n // MC_CHUNK)
    streams = np.random.SeedSequence(seed).spawn(n_chunks)
    sums = np.zeros(3)
    prods = []
    for i, ss in enumerate(streams):
        size = min(MC_CHUNK, n - i * MC_CHUNK)
        lam = np.random.Generator(np.random.Philox(ss)).standard_normal((size, 3))
        sa, sb, sc = np.sign(lam @ a), np.sign(lam @ b), np.sign(lam @ c)
        # particle 2 gives the opposite sign of particle 1 on the same axis
        ab, ac, bc = sa * -sb, sa * -sc, sb * -sc
        sums += [ab.sum(), ac.sum(), bc.sum()]
        prods.append(np.stack([ab, ac, bc]))
    P_ab, P_ac, P_bc = sums / n
    samples = np.concatenate(prods, axis=1)
    sign = 1.0 if P_ab >= P_ac else -1.0
    z = sign * (samples[0] - samples[1]) - samples[2]
    stderr = float(np.std(z, ddof=1) / math.sqrt(n)) if n > 1 else math.inf
    return _report(float(P_ab), float(P_ac), float(P_bc), stderr, n)
