"""Helpers for preparing HTML-like Graphviz labels."""

from __future__ import annotations

from html import escape as html_escape
from typing import Iterable, List


def escape_label(value: str) -> str:
    """Return ``value`` escaped for use inside Graphviz HTML labels.

    Non-ASCII characters become decimal entities and the single quote uses
    ``&#39;``, the only forms every Graphviz release accepts.
    """

    escaped = html_escape(value, quote=True).replace("&#x27;", "&#39;")
    return escaped.encode("ascii", "xmlcharrefreplace").decode("ascii")


def build_node_label(
    title: str,
    lines: Iterable[str],
    *,
    badge: str,
    badge_bgcolor: str = "#1f2937",
    badge_color: str = "#ffffff",
    body_color: str = "#1a202c",
    border_color: str = "#1a202c",
) -> str:
    """Return an HTML label with a coloured badge cell beside a title and text lines."""

    body_rows: List[str] = [f'<TR><TD ALIGN="LEFT"><FONT COLOR="{body_color}"><B>{escape_label(title)}</B></FONT></TD></TR>']
    for line in lines:
        body_rows.append(f'<TR><TD ALIGN="LEFT"><FONT COLOR="{body_color}">{escape_label(line)}</FONT></TD></TR>')
    body_table = '<TABLE BORDER="0" CELLBORDER="0" CELLSPACING="0">' + "".join(body_rows) + "</TABLE>"
    badge_cell = (
        f'<TD BGCOLOR="{badge_bgcolor}" ALIGN="CENTER" VALIGN="MIDDLE" WIDTH="32" HEIGHT="32">'
        f'<FONT COLOR="{badge_color}"><B>{escape_label(badge)}</B></FONT></TD>'
    )
    return (
        f'<<TABLE BORDER="0" CELLBORDER="1" CELLSPACING="0" COLOR="{border_color}"><TR>'
        f'{badge_cell}<TD ALIGN="LEFT">{body_table}</TD></TR></TABLE>>'
    )


__all__ = ["build_node_label", "escape_label"]
