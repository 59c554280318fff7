"""
Check package initialization

Analyses over behaviors and traces: enabledness gaps, trace audit,
exclusion interference and serializability.
"""
