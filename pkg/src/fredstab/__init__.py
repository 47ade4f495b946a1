"""Spectral rapid-stabilization toolkit.

From the eigenvalue and control-coefficient data of a diagonalizable
evolution system, synthesize the shifted-spectrum feedback law, certify
the finite-truncation transformation identities, and simulate the
closed-loop dynamics (including the semilinear torus example).
"""

from .errors import (AssumptionError, ConfigError, FredstabError,
                     IntegratorError, IterationDiverged, SolverError)
from .models import (ModelDescriptor, SturmLiouvilleProblem, gribov_model,
                     heat_torus_model, liouville_transform, schrodinger_model,
                     sturm_liouville_eigs_direct, sturm_liouville_model)
from .simulate import (DecayFit, SimulationTrace, burgers_basin_search,
                       fit_decay, random_state, simulate_burgers,
                       simulate_closed_loop, simulate_target)
from .spectral_core import (AssumptionVerdict, SpectralBranch, SpectralSystem,
                            WeightedNorm, admissible_r_interval, branch_split,
                            classify_controllability, sobolev_norm,
                            system_from_json, system_to_json, verify_assumptions,
                            verify_control, verify_gap, verify_growth)
from .synthesis import (BranchGains, FeedbackLaw, ShiftSelection,
                        beta_reduced_gains, inverse_gap_sum_profile,
                        resolvent_column, resolvent_matrix, select_shift,
                        solve_gains_direct, solve_gains_iterative,
                        synthesize_feedback)
from .transform import (AssembledTransform, BranchTransform, ClosedLoopMatrix,
                        FredholmTransform, assemble_system_transform,
                        build_system_transform, build_transform,
                        closed_loop_matrix, conditioning_profile,
                        conditioning_vs_truncation, control_diagonal,
                        normalized_resolvent, operator_equality_residual)
from .diagnostics import (DiagnosticsReport, compactness_proxy, gain_trend,
                          make_report, spectrum_match_error)

__version__ = "0.1.0"
