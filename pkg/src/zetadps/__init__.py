"""Distributed persistent signals: calculus, engine, consistency and recovery."""
from .consistency import (consistent_at, consistent_env, equiv_mode, equiv_records_at,
                          equiv_records_upto, equiv_tm, history_equiv_upto, wellformed_env,
                          wellformed_instance)
from .engine import MachineState, SourceFeeds, explicit_step, propagate, pure_step, run, step
from .env import ResolverEntry, SwitchHistory, check_acyclic, history_at, history_record
from .recovery import CheckpointState, recalc_instance, run_checkpoint, theorem2_oracle
from .store import BOTTOM, Relation, has_record_at, insert, latest_at, timestamps_upto

__version__ = "0.1.0"

__all__ = [
    "BOTTOM", "CheckpointState", "MachineState", "Relation", "ResolverEntry", "SourceFeeds",
    "SwitchHistory", "check_acyclic", "consistent_at", "consistent_env", "equiv_mode",
    "equiv_records_at", "equiv_records_upto", "equiv_tm", "explicit_step", "has_record_at",
    "history_at", "history_equiv_upto", "history_record", "insert", "latest_at", "propagate",
    "pure_step", "recalc_instance", "run", "run_checkpoint", "step", "theorem2_oracle",
    "timestamps_upto", "wellformed_env", "wellformed_instance",
]
