"""
Core package initialization

Kernel value types and the legality rules for machine transitions.
"""
