"""Post-processing figures for barofv CSV outputs."""

from .figures import error_curves, fit_loglog_slope, line_profile, pseudocolor, rel_entropy_table

__version__ = "0.1.0"
