"""Gross-Pitaevskii dynamics in multi-well traps and its discrete NLS reduction."""
