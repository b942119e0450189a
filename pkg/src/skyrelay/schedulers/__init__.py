"""Scheduling schemes and the schedule validator."""

from .common import (
    Activation, FlowOutcome, SchedContext, ScheduleResult, Segment, SlotRecord,
)
from .concurrent import rcs, rr
from .jrds import jrds
from .tdma import tdma
from .validate import Violation, validate_schedule

SCHEMES = {"tdma": tdma, "rr": rr, "rcs": rcs, "jrds": jrds, "oracle": None}

__all__ = [
    "Activation", "FlowOutcome", "SCHEMES", "SchedContext", "ScheduleResult", "Segment",
    "SlotRecord", "Violation", "jrds", "rcs", "rr", "tdma", "validate_schedule",
]
