"""Eigenvector-free spectral clustering by graph mixing."""
from .graph import (DegenerateGraphError, GraphConfig, PointSet, SimilarityMatrix,
                    build_epsilon_graph, build_gaussian_graph, build_graph,
                    build_pnn_graph, extract_subgraph, load_edge_list,
                    load_points_csv, write_edge_list)
from .metrics import exact_recovery, ncut, nmi
from .mixing import (InitSpec, MixingOperator, MixingState, apply_operator,
                     d_weighted_mean, init_agents, run_until_tolerance)
from .rard import (ClusterAssignment, ClusterTree, RardConfig, find_gap,
                   prd_cluster, rard_cluster, rard_cluster_theoretical)

__version__ = "0.1.0"
