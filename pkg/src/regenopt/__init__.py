"""Robust regenerator placement under budgeted uncertainty.

Library layout:

* :mod:`regenopt.instance`       - data model, generator, file I/O
* :mod:`regenopt.shortest_paths` - robust distances and the communication graph
* :mod:`regenopt.adversary`      - worst-case cost and scenario oracles
* :mod:`regenopt.core`           - exact placement solver and verification
* :mod:`regenopt.methods`        - DWC/RSB/RDB pipelines, CCG, Benders, IRO
* :mod:`regenopt.hsl`            - adversarial hide-and-seek game
* :mod:`regenopt.bench`          - experiment runner and performance profiles
* :mod:`regenopt.cli`            - command-line entry point
"""

from .adversary import WorstCaseCost, dual_certificate, worst_case_node_cost, worst_case_scenario
from .backend import backend_name
from .core import (
    Placement,
    WarmStart,
    brute_force_rlp,
    preprocess,
    solve_rlp_exact,
    verify_placement,
)
from .hsl import GameState, estimate_sensitivity, hider_step, play_hsl, seeker_step
from .instance import (
    EdgeData,
    NetworkInstance,
    NodeData,
    Scenario,
    build_instance,
    generate_instance,
    load_instance,
    save_instance,
)
from .methods import (
    ScenarioPool,
    SolveReport,
    solve_benders,
    solve_ccg,
    solve_dwc,
    solve_iro,
    solve_rdb,
    solve_rsb,
)
from .shortest_paths import (
    Regime,
    RobustDistanceMatrix,
    TransformedGraph,
    build_transformed_graph,
    nominal_shortest_paths,
    robust_sp_dynamic,
    robust_sp_static,
)

__version__ = "0.1.0"

__all__ = [
    "EdgeData",
    "GameState",
    "NetworkInstance",
    "NodeData",
    "Placement",
    "Regime",
    "RobustDistanceMatrix",
    "Scenario",
    "ScenarioPool",
    "SolveReport",
    "TransformedGraph",
    "WarmStart",
    "WorstCaseCost",
    "backend_name",
    "brute_force_rlp",
    "build_instance",
    "build_transformed_graph",
    "dual_certificate",
    "estimate_sensitivity",
    "generate_instance",
    "hider_step",
    "load_instance",
    "nominal_shortest_paths",
    "play_hsl",
    "preprocess",
    "robust_sp_dynamic",
    "robust_sp_static",
    "save_instance",
    "seeker_step",
    "solve_benders",
    "solve_ccg",
    "solve_dwc",
    "solve_iro",
    "solve_rdb",
    "solve_rlp_exact",
    "solve_rsb",
    "verify_placement",
    "worst_case_node_cost",
    "worst_case_scenario",
]
