"""
CLI package initialization

Command-line entry point and run manifests.
"""
