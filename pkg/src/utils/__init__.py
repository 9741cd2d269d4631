"""
Utilities package: rationals, errors and logging.
"""
