"""
Sim package initialization

Multi-object execution: channels, schedulers, traces and exploration.
"""
