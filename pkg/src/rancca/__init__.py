"""Canonical correlation analysis of radio-access-network KPI data."""

from .cca import CcaModel, VariatePair, canonical_correlation, fit, loadings, transform
from .kpi import KpiFrame, align, load_csv, save_csv, standardize
from .pairing import Arrangement, PairedDataset, pair_cross_cell, pair_cross_variable
from .sim import SectorTrace, ShutdownPolicy, SimConfig, simulate

__version__ = "0.1.0"

__all__ = [
    "Arrangement",
    "CcaModel",
    "KpiFrame",
    "PairedDataset",
    "SectorTrace",
    "ShutdownPolicy",
    "SimConfig",
    "VariatePair",
    "align",
    "canonical_correlation",
    "fit",
    "load_csv",
    "loadings",
    "pair_cross_cell",
    "pair_cross_variable",
    "save_csv",
    "simulate",
    "standardize",
    "transform",
]
