"""
OCN-RGP - adaptive consensus-based reference generation for open-channel networks.

Main application package.
"""

__version__ = "0.1.0"
