"""CSIT-sharing strategies for cooperating transmitters."""

from .cli import main

__all__ = ["main"]
