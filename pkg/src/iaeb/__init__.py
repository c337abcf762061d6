"""Intersection AEB simulator: commercial radar logic plus two connected upgrades."""

from .scenario import Scenario, ScenarioError, parse_scenario, validate_scenario
from .sim import RunOutcome, SimEvent, WorldState, run, step
from .sweep import GridResult

__version__ = "0.1.0"
