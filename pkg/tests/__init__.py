# Test package for SpecShield
"""
This package contains automated tests for SpecShield using unittest.
"""
