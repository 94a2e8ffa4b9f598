"""Admission control and resource-block scheduling for URLLC users."""

from .admission import exact_uum, greedy_admission, matching_admission_d1
from .continuous import baseline_greedy_continuous, continuous_sla_satisfied, ita
from .fbl import (
    SlaParams,
    db_to_linear,
    dispersion,
    frame_error_probability,
    gaussian_q,
    gaussian_q_inv,
    linear_to_db,
    min_snr_for_d,
    required_blocks,
)
from .feasibility import build_relaxed_lp, check_feasibility, flow_feasibility_oracle, solve_lp
from .instance import (
    AdmissionResult,
    BinaryInstance,
    ScenarioConfig,
    SnrGrid,
    assign_demand_bands,
    binarize,
    generate_snr_grid,
    verify_schedule,
)
from .reduction import UndirectedGraph, graph_to_urllc, independent_set_brute_force

__version__ = "0.1.0"
