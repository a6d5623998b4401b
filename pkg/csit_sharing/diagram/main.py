"""Graphviz rendering of a CSIT allocation: which TX holds which channel blocks."""
from __future__ import annotations

from pathlib import Path
from subprocess import CalledProcessError
from typing import List, Optional

from ..csit import CsitAllocation, PrecisionKind
from .html_utils import build_node_label

try:  # Optional dependency used for diagram generation
    from graphviz import Digraph  # type: ignore
    from graphviz.backend import ExecutableNotFound  # type: ignore
except Exception:  # pragma: no cover - library is optional
    Digraph = None  # type: ignore
    ExecutableNotFound = None  # type: ignore

EXACT_COLOR = "#2563eb"
BITS_COLOR = "#d97706"
FIXED_COLOR = "#6b7280"


def tx_lines(alloc: CsitAllocation, j: int) -> List[str]:
    """One line per known row of TX ``j``: precision and the TXs whose blocks it covers."""

    lines = []
    for i in range(alloc.K):
        cols = alloc.known_columns(i, j)
        if not cols:
            continue
        blocks = ", ".join(f"H[{i + 1},{k + 1}]" for k in cols)
        lines.append(f"row {i + 1} ({alloc.precision(i, j)}): {blocks}")
    return lines or ["no CSIT"]


def _badge_color(alloc: CsitAllocation, j: int) -> str:
    kinds = {alloc.precision(i, j).kind for i in range(alloc.K) if alloc.known_columns(i, j)}
    if not kinds:
        return FIXED_COLOR
    return EXACT_COLOR if kinds == {PrecisionKind.EXACT} else BITS_COLOR


def _create_graph(name: str) -> "Digraph":
    graph = Digraph(name, format="png")
    graph.attr(rankdir="LR")
    graph.attr(bgcolor="white")
    graph.attr(fontname="Helvetica")
    graph.node_attr.update(fontname="Helvetica", fontsize="12", shape="plaintext")
    graph.edge_attr.update(fontname="Helvetica", fontsize="10")
    return graph


def build_allocation_graph(alloc: CsitAllocation) -> "Digraph":
    """TX nodes list their known blocks; an edge TX j -> RX i marks a known row."""

    graph = _create_graph("csit_allocation")
    for j in range(alloc.K):
        graph.node(
            f"tx{j}",
            label=build_node_label(f"TX {j + 1}", tx_lines(alloc, j), badge="TX", badge_bgcolor=_badge_color(alloc, j)),
        )
    for i in range(alloc.K):
        graph.node(f"rx{i}", label=build_node_label(f"RX {i + 1}", [f"{alloc.n_rx[i]} antenna(s)"], badge="RX"))
    for j in range(alloc.K):
        for i in range(alloc.K):
            if alloc.known_columns(i, j):
                graph.edge(f"tx{j}", f"rx{i}", label=str(alloc.precision(i, j)))
    return graph


def generate_allocation_diagram(alloc: CsitAllocation, output_path: str) -> Optional[str]:
    """Render ``alloc`` to ``output_path``; returns ``None`` when graphviz is not installed."""

    if Digraph is None:
        return None
    graph = build_allocation_graph(alloc)
    target = Path(output_path)
    if target.suffix:
        graph.format = target.suffix.lstrip(".")
    try:
        return graph.render(str(target.with_suffix("")), cleanup=True)
    except Exception as exc:
        if ExecutableNotFound is not None and isinstance(exc, ExecutableNotFound):
            raise RuntimeError("Graphviz 'dot' executable was not found on PATH") from exc
        if isinstance(exc, CalledProcessError):
            raise RuntimeError(f"Graphviz failed to render the diagram: {exc}") from exc
        raise


__all__ = ["build_allocation_graph", "generate_allocation_diagram", "tx_lines"]
