"""
Services package: game model, semivalues, Khintchine constants, reductions and inverse solvers.
"""
