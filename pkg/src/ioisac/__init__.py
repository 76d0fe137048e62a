"""Inference-oriented ISAC edge-inference simulator.

Models a multi-device integrated-sensing-and-communication system end to end
(channels, zero-forcing links, SINRs, voting-fusion accuracy floor, latency
bound) and solves the joint power-allocation / device-scheduling problem with
an exhaustive Pareto optimizer and a fast local search, validated against
brute-force oracles.
"""

from .bench import (SweepResult, SweepRow, scheme_all_devices, scheme_io_isac,
                    scheme_sequential_edge, scheme_single_device, sweep)
from .channel import (ChannelSet, gen_channels, load_channels, pathloss_gain,
                      save_channels, strip_comm_interference)
from .errors import (AllInfeasible, DimensionError, DomainError, EmptySet,
                     Infeasible, IoIsacError, ParseError, RankDeficient,
                     SizeLimit, ValidationError, ZeroRate)
from .fusion import (DiversityMatrix, QualityProfile, accuracy_lower_bound,
                     build_diversity_matrix, fusion_accuracy_closed_form,
                     fusion_accuracy_exact, max_matching, rank_half,
                     single_device_accuracy)
from .jpads import (EvalPoint, Evaluator, ParetoFront, error_latency_region,
                    evaluate, fast_jpads, optimal_jpads, pareto_filter,
                    weighted_objective)
from .latency import LatencyBreakdown, latency_upper_bound
from .oracle import McEstimate, brute_matching, grid_power_oracle, monte_carlo_accuracy
from .palloc import P2Solution, PowerAllocation, feasible, min_powers_at, solve_p2
from .phy import (PhyCache, PhyState, comm_sinr, compute_phy_state,
                  sensing_sinr, spectral_efficiency, zf_beamformer, zf_receivers)
from .scenario import (ActivationVector, ScenarioConfig, aspect_cos,
                       default_scenario, load_scenario, pairwise_angle,
                       vote_threshold)

__version__ = "0.1.0"
