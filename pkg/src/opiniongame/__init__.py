"""Open-loop Nash equilibrium solver and simulator for opinion games on
influence networks."""

from .analytic import (CompleteUniformParams, LeaderParams, complete_limit,
                       complete_pairwise_distance, complete_params,
                       complete_trajectory, epsilon_consensus_time, gamma,
                       leader_distance, leader_limit, leader_params,
                       leader_trajectory)
from .linalg import (SingularMatrixError, exp_with_integral,
                     matrix_exponential, solve_linear)
from .network import (CompleteUniform, Diagnostic, GameMatrices, General,
                      InfluenceNetwork, SingleLeader, build_matrices,
                      classify_topology, is_valid, network_from_dict,
                      network_to_dict, validate)
from .solver import (BlockTransition, EquilibriumTrajectory, SpectralData,
                     StateCostateSystem, assemble_system, initial_costate,
                     kernel_cosh, kernel_coshm1, kernel_sinhc,
                     solve_equilibrium, spectral_blocks, spectral_data,
                     transition_blocks)
from .verify import (BestResponseResult, CostBreakdown, StationarityReport,
                     best_response, deviation_test, evaluate_cost,
                     nash_residual, quadratic_cost, stationarity_check)

__version__ = "0.1.0"
