"""
Exact semivalue toolkit for weighted voting games.
"""
