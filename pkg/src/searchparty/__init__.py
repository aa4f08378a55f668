"""Deterministic multi-robot search simulator.

A strategic layer of plan scripts, frame knowledge, and chatroom language
drives per-robot behavior-tree tactical layers inside a lockstep grid world.
"""

from .agent import Briefing, CycleOutput, StrategicAgent
from .comms import MessageBus, MessageEnvelope, decode_line
from .knowledge import Frame, FrameStore, QueryPattern
from .plans import Agenda, Interpreter, PlanInstance
from .scenario import Scenario, build_world, load_scenario
from .scripts import ScriptLibrary, load_library
from .sim import RunReport, Simulation, replay, run_scripted
from .world import World

__version__ = "0.1.0"

__all__ = [
    "Agenda",
    "Briefing",
    "CycleOutput",
    "Frame",
    "FrameStore",
    "Interpreter",
    "MessageBus",
    "MessageEnvelope",
    "PlanInstance",
    "QueryPattern",
    "RunReport",
    "Scenario",
    "ScriptLibrary",
    "Simulation",
    "StrategicAgent",
    "World",
    "build_world",
    "decode_line",
    "load_library",
    "load_scenario",
    "replay",
    "run_scripted",
    "__version__",
]
