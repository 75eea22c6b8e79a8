# Framework tests package for SpecShield
"""
This package contains test cases for the plugin system and settings layer of SpecShield.
"""
