"""Photon-by-photon simulation of wavefunction collapse under iterated weak
interferometric position measurement."""

from ._core import (
    EnsembleStats,
    Error,
    Grid,
    SimConfig,
    TrajectoryRecord,
    Wavefunction,
    aggregate_operator,
    apply_outcome,
    de_broglie_check,
    edge_leakage,
    estimate_position,
    fit_phase_wavenumber,
    gaussian_approx_final,
    init_flat,
    init_gaussian,
    init_random_superposition,
    init_two_lobe,
    l2_distance,
    local_momentum_density,
    local_momentum_second_moment,
    m_a,
    m_b,
    momentum_mean,
    momentum_variance,
    norm2,
    normalize,
    outcome_distribution,
    outcome_probability_binomial,
    port_a_weight,
    port_b_weight,
    port_probabilities,
    position_mean,
    position_variance,
    predicted_sigma2_xest,
    predicted_xest_density,
    resolution,
    run_criterion,
    run_ensemble,
    run_ensemble_from,
    run_trajectory,
    sequence_probability,
    within_branch,
)

__version__ = "0.1.0"


def default_grid(points: int = 4097) -> Grid:
    """Grid over [-pi/8, pi/8], the reference setup for k = 1."""
    import math

    return Grid(-math.pi / 8, math.pi / 8, points)
