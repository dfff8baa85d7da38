"""Normalized Ricci flow of conformal metrics on flat tori and round spheres."""

from ._core import (
    BlowUpError,
    ConfigError,
    FlowConfig,
    Integrator,
    Surface,
    SurfaceKind,
    VolumeControl,
    eval_rhs,
    evolve,
    gauss_bonnet_check,
    gauss_curvature,
    gn_ratio,
    laplacian,
    liouville_energy,
    manufactured_convergence,
    normalize_volume,
    random_initial_data,
    run,
    tm_ratio,
    volume,
)

__all__ = [name for name in dir() if not name.startswith("_")]
