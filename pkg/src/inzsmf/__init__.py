"""Zonotopic set-membership filtering on SE(2).

Modules:

* ``zonotope``       Euclidean zonotope calculus
* ``se2``            SE(2) group and se(2) algebra
* ``group_zonotope`` zonotopes with a pose-valued center
* ``gains``          pole placement and F-radius optimal observer gains
* ``invariant``      the invariant zonotopic filter
* ``zsmf``           the Euclidean zonotopic filter used as baseline
* ``bench``          vehicle simulation, metrics and experiment presets
* ``cli``            command-line front end
"""

from .bench import ExperimentConfig, MetricsReport, preset, run_experiment
from .gains import FRadiusOptimal, PoleConfiguration
from .group_zonotope import GroupZonotope, Side
from .invariant import InnovationMode, InzsmfState, SystemModel
from .se2 import Se2Element
from .zonotope import Zonotope
from .zsmf import ZsmfState

__version__ = "0.1.0"

__all__ = [
    "ExperimentConfig",
    "FRadiusOptimal",
    "GroupZonotope",
    "InnovationMode",
    "InzsmfState",
    "MetricsReport",
    "PoleConfiguration",
    "Se2Element",
    "Side",
    "SystemModel",
    "Zonotope",
    "ZsmfState",
    "preset",
    "run_experiment",
]
