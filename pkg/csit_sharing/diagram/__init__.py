"""Allocation diagram package. Rendering is a no-op without the graphviz bindings."""

from .main import build_allocation_graph, generate_allocation_diagram

__all__ = ["build_allocation_graph", "generate_allocation_diagram"]
