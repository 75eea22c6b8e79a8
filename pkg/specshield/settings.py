"""
Environment-driven settings.

An optional ~/.specshield file of KEY=VALUE lines is loaded into the process
environment before the CLI parses its flags.
"""
import os

from specshield.asm.isa import IsaProfile
from specshield.utils import is_debug_enabled

DEFAULT_ENV_FILE = "~/.specshield"
DEFAULT_ISA = "rv64gc"


def load_env_file(path=DEFAULT_ENV_FILE):
    """
    Load KEY=VALUE pairs into os.environ. Existing variables win.

    Args:
        path (str): File to read; a missing file is not an error

    Returns:
        dict: The variables that were set
    """
    path = os.path.expanduser(path)
    loaded = {}
    if not os.path.exists(path):
        return loaded
    with open(path, encoding="utf-8") as env:
        for line in env:
            line = line.strip()
            # Skip empty lines or comments
            if not line or line.startswith("#") or line.startswith("//"):
                continue
            if "=" not in line:
                continue
            key, value = line.split("=", 1)
            key = key.strip()
            value = value.strip().strip("\"'")
            if key in os.environ:
                continue
            os.environ[key] = value
            loaded[key] = value
            if is_debug_enabled():
                print(f"Set {key} to {value}")
    return loaded


def default_isa():
    """ISA profile used when --isa is not given."""
    return os.environ.get("SPECSHIELD_ISA", DEFAULT_ISA).lower()


def default_jobs():
    """Worker count for `attack` when --jobs is not given (1 = in-process)."""
    try:
        return max(0, int(os.environ.get("SPECSHIELD_JOBS", "1")))
    except ValueError:
        return 1


def resolve_isa(value=None):
    """
    The IsaProfile for an --isa value, falling back to SPECSHIELD_ISA.

    Raises:
        ConfigError: for unknown profile names
    """
    return IsaProfile.from_name(value or default_isa())
