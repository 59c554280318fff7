"""
DSL package initialization

Concrete syntax for behavior files and run manifests.
"""
