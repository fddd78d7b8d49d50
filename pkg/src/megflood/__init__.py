"""Flooding on Markovian evolving graphs.

Finite Markov chain tools, dynamic-graph processes (edge-Markovian,
node-Markovian, mobility models), a flooding simulator, estimators for the
density and independence parameters, and evaluable flooding-time bounds.
"""

from .dyngraph import (MegProcess, Snapshot, StaticMeg, TraceMeg, degree_into, estimate_alpha,
                       estimate_beta, expansion, spread, verify_expansion_events)
from .edgemeg import (EdgeChainSpec, EdgeMeg, build_two_state, sparse_flooding_comparator,
                      edge_meg_alpha, edge_meg_bound)
from .flooding import (BoundParams, FloodRun, flood, flooding_time_stats, phase_report,
                       stationarity_bound)
from .markov import (TransitionKernel, mixing_time, sample_trajectory, stationary_distribution,
                     total_variation)
from .nodemeg import NodeMeg, epoch_length, node_meg_bound, verify_pair_dependence

__version__ = "0.1.0"

__all__ = [
    "MegProcess", "Snapshot", "StaticMeg", "TraceMeg", "degree_into", "estimate_alpha",
    "estimate_beta", "expansion", "spread", "verify_expansion_events",
    "EdgeChainSpec", "EdgeMeg", "build_two_state", "sparse_flooding_comparator", "edge_meg_alpha",
    "edge_meg_bound",
    "BoundParams", "FloodRun", "flood", "flooding_time_stats", "phase_report", "stationarity_bound",
    "TransitionKernel", "mixing_time", "sample_trajectory", "stationary_distribution",
    "total_variation",
    "NodeMeg", "epoch_length", "node_meg_bound", "verify_pair_dependence",
]
