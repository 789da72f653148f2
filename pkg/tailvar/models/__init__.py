"""
Domain types and document schemas for tailvar.
"""
