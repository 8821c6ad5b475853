"""Queuing-system design instances expressed as compositional problems."""

from .cloud import CloudProvisioningInstance
from .constants import constant_report
from .effective_capacity import EffectiveCapacityInstance
from .ergodic import Mg1ErgodicInstance
from .mm1 import mm1_optimal_mu, mm1_problem, mm1_utility, mm1_utility_derivative
from .outage import OutageInstance
from .presets import PRESETS, get_preset, paper_ex1, paper_ex2, paper_ex3, paper_ex4, paper_ex5
from .toy import constrained_quadratic_problem, quadratic_problem, toy_constants
from .wired import Mg1WiredInstance

__all__ = [
    "CloudProvisioningInstance",
    "EffectiveCapacityInstance",
    "Mg1ErgodicInstance",
    "Mg1WiredInstance",
    "OutageInstance",
    "PRESETS",
    "constant_report",
    "constrained_quadratic_problem",
    "get_preset",
    "mm1_optimal_mu",
    "mm1_problem",
    "mm1_utility",
    "mm1_utility_derivative",
    "paper_ex1",
    "paper_ex2",
    "paper_ex3",
    "paper_ex4",
    "paper_ex5",
    "quadratic_problem",
    "toy_constants",
]
