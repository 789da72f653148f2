"""
Data package for tailvar.
Contains published reference values used by the simulation report.
"""
