"""
Utility functions for SpecShield that don't fit elsewhere.

This module contains functions for:
- is_debug_enabled() - Controls output verbosity based on SPECSHIELD_DEBUG environment variable
- silence_stdout() - Suppresses chatter from plugin discovery
- Console helpers built on click.style
- dump_json() - The one JSON encoding used for every report
"""
import io
import json
import os
import sys
from contextlib import contextmanager

import click


def is_debug_enabled():
    """
    Check if debug mode is enabled via the SPECSHIELD_DEBUG environment variable.

    Returns:
        bool: True if debug mode is enabled, False otherwise
    """
    return os.environ.get("SPECSHIELD_DEBUG", "").lower() in ("true", "yes", "y", "1")


@contextmanager
def silence_stdout():
    """
    Context manager that silences stdout unless debug mode is enabled.
    """
    if is_debug_enabled():
        yield
        return
    original_stdout = sys.stdout
    sys.stdout = io.StringIO()
    try:
        yield
    finally:
        sys.stdout = original_stdout


def debug_echo(message, fg="blue"):
    """Print a message only when debug mode is enabled."""
    if is_debug_enabled():
        click.echo(click.style(message, fg=fg))


def echo_warning(message):
    click.echo(click.style(f"warning: {message}", fg="yellow"), err=True)


def echo_error(message):
    click.echo(click.style(f"error: {message}", fg="red"), err=True)


def dump_json(data):
    """
    Serialize a report with stable key order.

    Args:
        data: JSON-compatible object

    Returns:
        str: UTF-8 safe JSON text ending with a newline
    """
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def write_json(path, data):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_json(data))


def echo_diagnostics(diagnostics):
    """Print hardening diagnostics to stderr, errors in red and warnings in yellow."""
    for diagnostic in diagnostics:
        where = f"line {diagnostic.line}: " if diagnostic.line else ""
        if diagnostic.level == "error":
            echo_error(where + diagnostic.message)
        else:
            echo_warning(where + diagnostic.message)
