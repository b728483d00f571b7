"""Planar N-body dynamics in McGehee blown-up coordinates."""

__version__ = "0.1.0"

from .blowup import (BlownUpState, ScaleInvariants, Stratum, blow_down, blow_up,  # noqa: E402
                     blown_up_field, classify_stratum, physical_time, scale_invariants)
from .central import (CentralConfiguration, Equilibrium, enumerate_central_configurations,  # noqa: E402
                      equilibria_from_cc, euler_configuration, lagrange_configuration,
                      refine_central_configuration)
from .errors import *  # noqa: E402,F401,F403
from .flows import homothetic_collapse_check, integrate_blowup, integrate_newton  # noqa: E402
from .homographic import (KeplerState, homographic_orbit, kepler_solve,  # noqa: E402
                          rest_cycle_curve)
from .newton import (MassSystem, energy_and_momenta, mass_inner, newton_field,  # noqa: E402
                     potential_and_gradient, size, to_center_of_mass)
from .ode import EventSpec, IntegrationSpec, Trajectory, integrate, invariant_drift  # noqa: E402
