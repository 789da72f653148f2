"""
Utility functions for tailvar.
"""
