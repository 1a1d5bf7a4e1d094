"""The tsplinebpx command: run, mesh, compare and schema subcommands."""

from .main import main

__all__ = ["main"]
