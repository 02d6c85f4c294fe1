"""Axisymmetric vortex-ring subsolution: profile, ring evolution, Biot-Savart
velocity, pressure corrector, compactly supported Reynolds stress and energy."""
from ._accel import HAS_NUMBA, backend
from .profile import (VorticityProfile, closed_form_gamma_rho, eval_profile, gamma_rho, layer_flux, moment,
                      rotation_energy_integral, solve_profile)
from .ring import HalfPlanePoint, RingParams, RingState, dgamma_dt, gamma, invert_gamma, ring_state
from .kernels import G, H, K_2d, K_ax, kernel_table
from .biotsavart import (GridSpec, QuadratureRule, VelocitySample, asymptotic_leading, residual, velocity,
                         velocity_field_grid, velocity_many, velocity_on_ring)
from .reynolds import (CompatibilityError, PressureCorrector, antidivergence, discrepancy, forcing,
                       q1_coefficients, reynolds_field, verify_axisymmetric_lift)
from .energy import (EnergyReport, energy_slope_fit, kinetic_energy, lambda_max_traceless, reynolds_energy_bound,
                     total_subsolution_energy)

__version__ = "0.1.0"
