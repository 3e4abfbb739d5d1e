"""Convex generator programs with duality certificates.

Closed-form and solver-backed optimizers for distribution-matching
generators, exact and sampled critic-gap certificates, explicit two-layer
network recovery, a coarse-to-fine staged image pipeline, and the
alternating-gradient experiments they are benchmarked against.
"""

from ._core import (
    Error,
    beta_for_rank,
    check_feasible,
    closed_form_linear_weights,
    constraint_violation_1d,
    covariance_spectral_distance,
    downsample,
    dual_gap_sampled,
    histogram_match,
    polynomial_lift,
    recover_two_layer,
    run_line_experiment,
    run_pipeline,
    run_two_point_line,
    solve_1d_relu_program,
    solve_game,
    svt_generator,
    thresholded_rank,
    upsample,
)

__all__ = [
    "Error",
    "beta_for_rank",
    "check_feasible",
    "closed_form_linear_weights",
    "constraint_violation_1d",
    "covariance_spectral_distance",
    "downsample",
    "dual_gap_sampled",
    "histogram_match",
    "polynomial_lift",
    "recover_two_layer",
    "run_line_experiment",
    "run_pipeline",
    "run_two_point_line",
    "solve_1d_relu_program",
    "solve_game",
    "svt_generator",
    "thresholded_rank",
    "upsample",
]

__version__ = "1.0.0"
