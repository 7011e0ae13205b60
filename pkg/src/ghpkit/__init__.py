"""Exact distances between finite pointed measured metric spaces."""

from .cghp import (Correspondence, CghpCertificate, cgh_distance, cghp_distance, coupling_cost, distortion,
                   epsilon_isometry, hp_distance, project_subspace)
from .errors import BudgetExceeded, GhpError, ValidationError
from .flatmetrics import (FiniteMeasure, GroundSpace, TransportPlan, hall_transport, hausdorff_distance,
                          prokhorov_distance, strassen_coupling, strassen_value, total_variation)
from .ghp import (GhpResult, LocalizationQuery, check_convergence, empirical_weak_distance, ghp_distance,
                  integral_ghp, localized_a, localized_hausdorff, localized_prokhorov)
from .graphs import RootedGraph, bs_distance, bs_gh_consistency, graph_to_space
from .lp import FlowNetwork, LpProblem, lp_solve, max_flow
from .spaces import (BallDecomposition, FiniteSpace, SubspaceSpec, ball_decomposition, closed_ball,
                     discontinuity_radii, from_points, realize_subspace, validate_space)

__version__ = "0.1.0"
