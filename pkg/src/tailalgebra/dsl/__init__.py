"""Model language: parsing, lowering and tail analysis."""

from .analysis import (DependenceWarning, Entry, TailReport, analyze, check_independence,
                       op_class)
from .graph import Node, ProgramGraph, compile_model, lower, to_source
from .parser import parse

__all__ = ["parse", "lower", "compile_model", "to_source", "analyze", "check_independence",
           "op_class", "Node", "ProgramGraph", "TailReport", "Entry", "DependenceWarning"]
