"""Collapse-model predictions for neutral meson oscillations."""

__version__ = "0.1.0"

from .quantities import Quantity, propagate
from .mesons import (
    Lifetimes,
    MesonParams,
    RawObservables,
    Species,
    WidthRatio,
    load_dataset,
    width_asymmetry,
    widths_from_lifetimes,
    widths_from_ratio,
)
from .inference import AbsoluteMasses, Scenario, figure1_data, lambda_estimated, solve_masses, table1
from .csl import CslParams, asymmetry, csl_rates, prob_flavor_csl, prob_mass_csl
from .qmupl import QmuplParams, lambda_qmupl, prob_flavor_qmupl, prob_mass_qmupl
from .stochastic import SimConfig, run_kicks, run_trajectories
from .gkls import BlockDensity, GklsGenerators, evolve

__all__ = [
    "AbsoluteMasses",
    "BlockDensity",
    "CslParams",
    "GklsGenerators",
    "Lifetimes",
    "MesonParams",
    "QmuplParams",
    "Quantity",
    "RawObservables",
    "Scenario",
    "SimConfig",
    "Species",
    "WidthRatio",
    "asymmetry",
    "csl_rates",
    "evolve",
    "figure1_data",
    "lambda_estimated",
    "lambda_qmupl",
    "load_dataset",
    "prob_flavor_csl",
    "prob_flavor_qmupl",
    "prob_mass_csl",
    "prob_mass_qmupl",
    "propagate",
    "run_kicks",
    "run_trajectories",
    "solve_masses",
    "table1",
    "width_asymmetry",
    "widths_from_lifetimes",
    "widths_from_ratio",
]
