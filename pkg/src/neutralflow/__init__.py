"""Frequency-domain controllability analysis of neutral delay transport
systems on directed metric graphs, with a time-domain cross-check simulator.
"""

from .network import Network, EdgeCoefficients, FlowExponents, build_network, line_graph_adjacency, flow_exponents
from .delays import DelayMeasure, DelayBank, symbol, apply_history, check_gap
from .operators import Grid, ThetaGrid, FrequencyToolkit, assemble_grid, theta_grid
from .control import ControlConfig

__all__ = [
    "Network",
    "EdgeCoefficients",
    "FlowExponents",
    "build_network",
    "line_graph_adjacency",
    "flow_exponents",
    "DelayMeasure",
    "DelayBank",
    "symbol",
    "apply_history",
    "check_gap",
    "Grid",
    "ThetaGrid",
    "FrequencyToolkit",
    "assemble_grid",
    "theta_grid",
    "ControlConfig",
]
