"""Spectral asymptotics of magnetic Neumann Laplacians in the strong-field limit.

The package computes the universal de Gennes constants, assembles a
boundary-fitted finite element model of the magnetic Laplacian near the
boundary of a planar domain, solves for the low-lying eigenvalues, and
compares them with two-term asymptotic laws, explicit quasimodes, Agmon
localization estimates and the third critical field.
"""
from __future__ import annotations

__version__ = "0.1.0"

from .asymptotics import AsymptoticPrediction, predict_two_term, predictions, theta_half
from .critical_field import CriticalFieldResult, hc3_formula, hc3_root
from .eigensolve import EigResult, SolverError, dense_pairs, lowest_pairs
from .field import FieldModel, MinimumData, locate_minimum
from .geometry import BoundaryCurve, TubularMap
from .halfline import DeGennesConstants, degennes_constants
from .problem import SpectralProblem
from .strip import OperatorPair, StripDisc, assemble
from .sweep import AsymptoticFit, AsymptoticRegressor, SweepRecord, fit, run_sweep

__all__ = [
    "__version__",
    "AsymptoticFit",
    "AsymptoticPrediction",
    "AsymptoticRegressor",
    "BoundaryCurve",
    "CriticalFieldResult",
    "DeGennesConstants",
    "EigResult",
    "FieldModel",
    "MinimumData",
    "OperatorPair",
    "SolverError",
    "SpectralProblem",
    "StripDisc",
    "SweepRecord",
    "TubularMap",
    "assemble",
    "degennes_constants",
    "dense_pairs",
    "fit",
    "hc3_formula",
    "hc3_root",
    "locate_minimum",
    "lowest_pairs",
    "predict_two_term",
    "predictions",
    "run_sweep",
    "theta_half",
]
