"""
Semantics package initialization

Derivation of I/O*-state machine transitions from service diagrams.
"""
