"""Render the five study-figure analogues from sqa-chain CSV outputs.

This package consumes only the CSVs and manifests written by the simulation
CLI; no simulation logic lives here.
"""

__version__ = "0.1.0"
