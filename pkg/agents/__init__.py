"""Enumeration, Monte-Carlo and report agents."""
