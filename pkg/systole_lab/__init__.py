"""
Systole Lab: analytic systole, bounds and experiments on meshed surfaces.
"""
