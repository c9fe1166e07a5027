"""
Reference generation for open-channel networks.

Graph construction, consensus weights, channel geometry, the centralized
and distributed protocol runners, and the convergence analysis.
"""
