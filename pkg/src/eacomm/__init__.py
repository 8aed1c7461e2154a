"""Entanglement-assisted qubit communication: tasks, bounds, optimisation, optics and statistics."""

from .classical import BudgetExceededError, max_classical_value
from .protocols import EAQProtocol, protocol_R, protocol_S, protocol_T
from .qcore import ValidationError
from .scenario import Behavior, GameFunctional, Scenario, evaluate, functional_RAC, functional_S
from .seesaw import SeesawConfig, seesaw_eaq, sweep_partial_entanglement

__all__ = [
    "Behavior",
    "BudgetExceededError",
    "EAQProtocol",
    "GameFunctional",
    "Scenario",
    "SeesawConfig",
    "ValidationError",
    "evaluate",
    "functional_RAC",
    "functional_S",
    "max_classical_value",
    "protocol_R",
    "protocol_S",
    "protocol_T",
    "seesaw_eaq",
    "sweep_partial_entanglement",
]
__version__ = "0.1.0"
