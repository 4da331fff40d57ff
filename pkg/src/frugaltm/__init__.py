"""Tsetlin machine simulator with fault injection, LFSR randomness and game analysis."""
from .automata import Action, Event, FaultSpec, TsetlinAutomaton
from .datasets import BooleanizedDataset, RawDataset, SplitSpec, booleanize, load_breast_cancer, load_iris, xor_dataset
from .feedback import FeedbackTables, FeedbackType
from .machine import EventCounters, FaultSite, Machine, Mode, TMConfig, xor_config
from .rng import RngKind, RngSpec, RngStream

__version__ = "0.1.0"

__all__ = [
    "Action", "BooleanizedDataset", "Event", "EventCounters", "FaultSite", "FaultSpec", "FeedbackTables",
    "FeedbackType", "Machine", "Mode", "RawDataset", "RngKind", "RngSpec", "RngStream", "SplitSpec", "TMConfig",
    "TsetlinAutomaton", "booleanize", "load_breast_cancer", "load_iris", "xor_config", "xor_dataset",
]
