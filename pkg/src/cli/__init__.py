"""
Command-line application.
"""
