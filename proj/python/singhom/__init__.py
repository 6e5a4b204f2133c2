"""Singular semilinear Dirichlet solver and perforated-domain homogenization."""

from ._singhom import (
    ConfigError,
    Mesh,
    c0_for_mu,
    dirichlet_eigenpair,
    discrete_capacity,
    estimate_lambda_mono,
    gk,
    interval_mesh,
    normalize_config,
    prescribed_mu_radius,
    radius_law,
    rectangle_mesh,
    run,
    solve,
    strange_term_mu,
    suite,
    tk,
    y_delta,
    z_delta,
)

__all__ = [
    "ConfigError",
    "Mesh",
    "c0_for_mu",
    "dirichlet_eigenpair",
    "discrete_capacity",
    "estimate_lambda_mono",
    "gk",
    "interval_mesh",
    "normalize_config",
    "prescribed_mu_radius",
    "radius_law",
    "rectangle_mesh",
    "run",
    "solve",
    "strange_term_mu",
    "suite",
    "tk",
    "y_delta",
    "z_delta",
]
