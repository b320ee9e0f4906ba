"""CLI sub-command aggregator.

Every sub-command has its own module under `app.routers.cli.<command>`,
each exposing `register(subparsers)` that adds its parser and binds a
`handler(args, out) -> exit code`. This file registers them all onto the
parser that `app.main` builds.
"""
import argparse

from . import (
    enumerate, lvalue, dedekind, spoly, moments,
    distribution, density, verify, report,
)

_COMMANDS = (enumerate, lvalue, dedekind, spoly, moments, distribution, density, verify, report)


def register_all(subparsers: argparse._SubParsersAction) -> None:
    for command in _COMMANDS:
        command.register(subparsers)


__all__ = ["register_all"]
