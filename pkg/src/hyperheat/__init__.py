"""Heat flow on hyperbolic space: kernels, solvers, asymptotic profiles and entropy checks."""

from .bench import ExperimentConfig, RateReport, emit_outputs, fit_rate, run_experiment
from .datum import Atom, GridFunction, HoroBump, InitialDatum
from .entropy import (EntropyReport, SelfSimilarFrame, entropy_decay_series, from_self_similar, initial_frame,
                      log_sobolev_check, relative_entropy, to_self_similar)
from .geometry import HoroPoint, PolarPoint, hyperbolic_distance, lambda1, sphere_area
from .kernel import KernelSpec, KernelTable, eval_G2, eval_G3, eval_Gd, log_kernel, normalization
from .profiles import (TransientEquilibrium, directional_mass, memory_Phi, phi, phi_ratio_limit_check,
                       radial_C_bounds, radial_equilibrium_C)
from .solvers import SolverConfig, solve_general, solve_horospheric, solve_radial
from .sphere import SphericalSamples, sphere_grid

__version__ = "0.1.0"
