"""Polynomial fields on the 3-sphere whose nodal sets are prescribed knots."""

from ._core import (
    KnotfieldError,
    NumericalError,
    alexander,
    braid_word,
    cartesian,
    catalog,
    crossings,
    evaluate,
    max_radius,
    modulus_critical_points,
    phase_critical_points,
    reconnection_thresholds,
    resultant_double_roots,
    run_cli,
    semiholomorphic,
    trace,
    verify,
    words_equivalent,
)

__all__ = [
    "KnotfieldError",
    "NumericalError",
    "alexander",
    "braid_word",
    "cartesian",
    "catalog",
    "crossings",
    "evaluate",
    "max_radius",
    "modulus_critical_points",
    "phase_critical_points",
    "reconnection_thresholds",
    "resultant_double_roots",
    "run_cli",
    "semiholomorphic",
    "trace",
    "verify",
    "words_equivalent",
]
