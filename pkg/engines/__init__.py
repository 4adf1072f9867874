"""Remedian sketches, special functions, distributions and analytics."""
