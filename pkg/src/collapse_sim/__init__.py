"""Spin-dependent wave packet of a damped oscillator coupled to an Ohmic bath."""
from .bath import (BathDiscretization, BathOscillator, BrownianWidth, bath_coeff_arrays,
                   bath_coeffs, build_ohmic_bath, sigma_xi_sq_asymptotic, sigma_xi_sq_series,
                   sigma_xi_sq_sum, thermal_factor, weak_damping_width)
from .bell import (BellReport, bell_check, classical_bound_monte_carlo,
                   correlation_from_weights, planar_setting, quantum_correlation, setting)
from .errors import (CollapseSimError, DegenerateWidthError, OracleFailure, ParameterError,
                     SingularEigenbasisError, UnsupportedRegimeError)
from .oscillator import FIG1_PARAMS, CoeffPair, ModelParams, Regime, coeffs, displacement, wronskian
from .wavepacket import (BlochVector, DensityGrid, GaussianPacket, GridSpec, PacketState,
                         WidthTable, branch_densities, branch_window_masses, density_grid,
                         gaussian_packet, grid_branch_masses, packet_state, probability_weights,
                         sigma_Q_sq, width_curves)

__version__ = "0.1.0"
