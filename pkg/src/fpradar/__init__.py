"""
Track web API co-occurrence in archived scripts and flag keywords abused for browser fingerprinting.
"""
__version__ = '1.0.0'
