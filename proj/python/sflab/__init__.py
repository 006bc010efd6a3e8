"""Spectral flow of twisted Dirac operators on the flat 3-torus."""

import json

from . import _core
from ._core import (
    CompatibilityError,
    ConfigError,
    Error,
    PreconditionError,
    __version__,
    circle_oracle_flow,
    conjugation_residual,
    convention_tag,
    degree,
    dirac_matrix,
    mapping_torus_index,
    plot_svg,
    untwisted_spectrum,
    winding_number,
)

__all__ = [
    "CompatibilityError",
    "ConfigError",
    "Error",
    "PreconditionError",
    "circle_oracle_flow",
    "conjugation_residual",
    "convention_tag",
    "degree",
    "dirac_matrix",
    "mapping_torus_index",
    "matrix_spectral_flow",
    "plot_svg",
    "spectral_flow",
    "untwisted_spectrum",
    "verify",
    "winding_number",
]


def spectral_flow(k, n, rank=2, delta=(1, 1, 1), window=3.0, solver="dense", seed=1,
                  radius=0.45, steepness=0.25):
    """Spectral flow of t -> D^d + t X_k on an n^3 grid, as a result dict."""
    return json.loads(_core._flow_json(k, n, rank, list(delta), window, solver, seed, radius, steepness))


def matrix_spectral_flow(a0, x, window=3.0, seed=1):
    """Spectral flow of t -> a0 + t x on [0, 1] for Hermitian matrices."""
    return json.loads(_core._matrix_flow_json(a0, x, window, seed))


def verify(ini_text, out_dir):
    """Runs the verification suite described by an INI config; returns the report."""
    return json.loads(_core._verify_json(ini_text, str(out_dir)))
