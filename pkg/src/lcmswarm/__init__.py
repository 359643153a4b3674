"""Deterministic simulator and verification harness for synchronous
Look-Compute-Move robot swarms in the plane."""

from .core import (
    Configuration,
    LightTuple,
    LocalFrame,
    ModelKind,
    Multiplicity,
    Point,
    Snapshot,
    circular_order,
    make_configuration,
    snapshot,
    to_local,
)
from .engine import Algorithm, FrameSpec, Rigidity, StepResult, Trace, replay, run
from .scheduler import SchedulePrefix, SchedulerKind, check_fair, generate, phi, validate

__all__ = [
    "Algorithm",
    "Configuration",
    "FrameSpec",
    "LightTuple",
    "LocalFrame",
    "ModelKind",
    "Multiplicity",
    "Point",
    "Rigidity",
    "SchedulePrefix",
    "SchedulerKind",
    "Snapshot",
    "StepResult",
    "Trace",
    "check_fair",
    "circular_order",
    "generate",
    "make_configuration",
    "phi",
    "replay",
    "run",
    "snapshot",
    "to_local",
    "validate",
]
