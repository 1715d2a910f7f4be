"""
liftc package metadata.
"""

__name__ = "liftc"
__version__ = "0.1.0"
