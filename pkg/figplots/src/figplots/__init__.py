"""Chart rendering for fabriclab CSV outputs.

This package only visualizes: it reads the CSV files the calculators and
the simulator write and turns them into PNGs.  No model math is
reimplemented here, so plots cannot drift from the numbers.
"""

from .render import FIGURE_KINDS, SchemaError, render

__all__ = ["FIGURE_KINDS", "SchemaError", "render"]
