"""Jacobi-Lie Systems Toolkit - symbolic checks and numerical integration"""
__version__ = "1.0.0"
