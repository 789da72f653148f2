"""
Configuration module for tailvar.
"""
