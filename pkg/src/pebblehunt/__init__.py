"""Treasure hunt on anonymous port-labeled graphs with pebble advice.

Modules: :mod:`graph` (instances), :mod:`oracle` (placements),
:mod:`agent` (restricted agent view), :mod:`hunters` (search procedures)
and :mod:`harness` (experiments, bound checks, reports).
"""
from .agent import AgentView, HuntResult, Observation, Transcript, begin_hunt
from .graph import InstanceSpec, PortLabeledGraph, gen_instance, validate_graph
from .hunters import HUNTERS, algorithm_for
from .oracle import PebblePlacement, choose_regime, place

__all__ = [
    "AgentView",
    "HUNTERS",
    "HuntResult",
    "InstanceSpec",
    "Observation",
    "PebblePlacement",
    "PortLabeledGraph",
    "Transcript",
    "algorithm_for",
    "begin_hunt",
    "choose_regime",
    "gen_instance",
    "place",
    "validate_graph",
]
