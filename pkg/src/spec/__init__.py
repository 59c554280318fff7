"""
Spec package initialization

Behavior descriptions: syntax tree, evaluation and static validation.
"""
