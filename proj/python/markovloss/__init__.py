"""Minimum-expected-loss decoding for hidden Markov models."""

from ._core import (
    CapacityError,
    ConsistencyError,
    CostSet,
    DecodeResult,
    EmissionModel,
    ErrorReport,
    HmmSpec,
    InputError,
    LossMatrix,
    ModelError,
    PosteriorMarginals,
    SimConfig,
    brute_force_mel,
    build_binary_loss_matrix,
    build_multistate_loss_matrix,
    compare_paths,
    decode_marginal,
    decode_markov_loss,
    expected_loss,
    extract_segments,
    forward_backward,
    generate_sequence,
    log_joint,
    marginal_costs,
    two_arm_grid,
    two_state_cnv_model,
    run_sweep,
    viterbi,
)

__all__ = [name for name in dir() if not name.startswith("_")]
