"""Regenerate the standard engine plots from ottosim sweep CSVs."""

from .csvio import SchemaError, SweepTable, fetch_coefficients, load_table
from .recipes import RECIPES, render

__version__ = "0.1.0"
