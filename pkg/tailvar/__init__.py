"""
tailvar

Extreme-value Value-at-Risk estimation for heavy-tailed return series, with
GARCH filtering and alpha-root multi-period scaling.
"""

__version__ = "0.1.0"
