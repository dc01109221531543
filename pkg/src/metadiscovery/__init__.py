"""Simulation-driven metagame discovery for turn-based team games."""
from .battle import BattleTables, run_battle
from .discovery import MetaSnapshot, RunConfig, run_discovery
from .roster import Roster, load_roster
from .stats import UsageStats
from .teambuilder import EpsilonSchedule, ScoreWeights

__all__ = ["BattleTables", "EpsilonSchedule", "MetaSnapshot", "Roster", "RunConfig", "ScoreWeights",
           "UsageStats", "load_roster", "run_battle", "run_discovery"]
__version__ = "0.1.0"
