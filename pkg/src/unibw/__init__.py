"""Uniform-in-bandwidth local empirical processes, Strassen-ball geometry and KDE bands."""
__version__ = "0.1.0"
