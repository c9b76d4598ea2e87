"""Consensus flows on n-spheres and SO(3): simulation, linearization, Monte Carlo."""

from .gains import GainFunction, check_condition_iii, constant, parse_gain, power
from .topology import Graph, graph_from_config, named_graph

__all__ = ["GainFunction", "Graph", "check_condition_iii", "constant", "graph_from_config",
           "named_graph", "parse_gain", "power"]
