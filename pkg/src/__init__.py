# Secure ISAC Beamforming Package
# Hybrid beamforming for IRS-assisted integrated sensing and communication
"""
Main package for the secure ISAC beamforming toolkit.
This package optimizes hybrid analog/digital precoders and IRS phases that
trade the secrecy of a legitimate link against radar beampattern similarity.
"""

__version__ = "1.0.0"
__author__ = "ISAC Research Team"
