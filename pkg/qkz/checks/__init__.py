"""Verification checks for qkz."""

from .base import Check, CheckReport, Outcome
from .algebra_checks import CommutationCheck, ExchangeCheck, ScalarCheck, VacuumCheck, YangBaxterCheck
from .bethe_checks import (
    BetheCheck,
    GeneratorsCheck,
    HighestWeightCheck,
    NestedCheck,
    UnwantedCheck,
    WeightsCheck,
)
from .runner import SuiteResult, run_suite

CHECKS = {
    "ybe": YangBaxterCheck,
    "exchange": ExchangeCheck,
    "commutation": CommutationCheck,
    "vacuum": VacuumCheck,
    "scalar": ScalarCheck,
    "bethe": BetheCheck,
    "unwanted": UnwantedCheck,
    "highest-weight": HighestWeightCheck,
    "weights": WeightsCheck,
    "generators": GeneratorsCheck,
    "nested": NestedCheck,
}

__all__ = [
    "Check",
    "CheckReport",
    "Outcome",
    "CHECKS",
    "YangBaxterCheck",
    "ExchangeCheck",
    "CommutationCheck",
    "VacuumCheck",
    "ScalarCheck",
    "BetheCheck",
    "UnwantedCheck",
    "HighestWeightCheck",
    "WeightsCheck",
    "GeneratorsCheck",
    "NestedCheck",
    "SuiteResult",
    "run_suite",
]
