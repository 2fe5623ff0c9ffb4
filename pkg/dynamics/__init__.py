"""
Complex dynamics of the modified Chebyshev root-finding family
"""

__version__ = "1.0.0"
__description__ = "Conjugate operators, fixed-point stability and escape-time rendering"
