"""Exact small-scale simulation of product, rank and MPS property testers."""

from .geometry import (
    MpsState,
    OverlapBracket,
    bunny_state,
    dist_r,
    gamma_state,
    ghz_state,
    max_entangled,
    mixture_distance_bound,
    overlap_bipartite,
    overlap_mps_dmrg,
    overlap_product_als,
    overlap_r,
    phi_state,
    product_state,
    schmidt_pair,
    state_zoo,
    theta_for,
    truncate_to_mps,
)
from .schur_weyl import (
    CopyOperator,
    CutSpec,
    check_commutation,
    haar_twirl,
    mps_projector,
    perm_average_two_sided,
    perm_operator,
    rank_projector,
    wss_projector,
)
from .states import (
    MixedState,
    PureState,
    SchmidtDecomposition,
    fidelity,
    haar_unitary,
    partial_trace,
    random_state,
    schmidt,
    tensor_product,
    trace_distance,
)
from .symfunc import CycleType, Partition, character, irrep_dimension, partitions_of, schur_polynomial
from .testers import (
    TestReport,
    copies_needed,
    hm_bound,
    mps_test_accept_prob,
    product_test_bound,
    product_test_prob,
    rank_test_accept_prob,
    rank_test_sample,
    swap_cut_accept_prob,
    swap_test_prob,
)

__version__ = "0.1.0"
