"""
Centralized version information for SpecShield.

This file serves as the single source of truth for version information
across the entire project.
"""

# Define version information
__version__ = "26.10.1"
VERSION_NAME = "CaptureLoop"
