"""Trace-driven data race detection for async-finish task-parallel programs.

Two detectors over the same event model: a split-clock engine with
lockset-indexed constant per-variable metadata, and a full-vector-clock
FastTrack baseline; plus a brute-force may-happen-in-parallel oracle, a
seeded trace generator, and a CLI tying them together.
"""

from .clocks import Epoch
from .fastracer import FastRacerEngine, RacerOptions, analyze_trace
from .fasttrack import FastTrackEngine, ft_analyze
from .oracle import apparent_races, apparent_racy_vars
from .report import AnalysisResult, RaceKind, RaceReport
from .trace import (Event, EventKind, InvalidTraceError, ParseError, Trace,
                    parse_trace, relinearize, validate_trace, write_trace)
from .workload import BUILTIN_NAMES, GenParams, builtin, generate

__all__ = [
    "AnalysisResult", "BUILTIN_NAMES", "Epoch", "Event", "EventKind",
    "FastRacerEngine", "FastTrackEngine", "GenParams", "InvalidTraceError",
    "ParseError", "RaceKind", "RaceReport", "RacerOptions", "Trace",
    "analyze_trace", "apparent_races", "apparent_racy_vars", "builtin",
    "ft_analyze", "generate", "parse_trace", "relinearize", "validate_trace",
    "write_trace",
]

__version__ = "0.1.0"
