"""
Chebydyn command-line scripts
"""

__version__ = "1.0.0"
__description__ = "Renderers and oracles for the modified Chebyshev family"
