"""Numerical services for hybridqed."""
