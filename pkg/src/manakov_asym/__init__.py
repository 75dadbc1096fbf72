"""Long-time asymptotics of the focusing three-component Manakov system.

Submodules: ``numerics`` (dense kernels and quadrature), ``special``
(log-Gamma, parabolic-cylinder functions), ``scattering`` (direct problem),
``asymptotics`` (leading-order field), ``evolve`` (split-step solver) and
``harness`` (the batch pipeline behind the command line).
"""
from .asymptotics import (asym_field, chi_tilde_of, leading_order, nu_of,
                          phase_convention_audit)
from .errors import *  # noqa: F401,F403
from .evolve import (FieldState, conserved_quantities, dispersive_tail_run, evolve_to,
                     step_strang)
from .scattering import (InitialProfile, ScatteringData, assemble_lax, gamma_at,
                         jost_mu_minus, reflection_gamma, scattering_grid, scattering_matrix)
from .special import gamma, ln_gamma, pcf_d

__version__ = "0.1.0"
