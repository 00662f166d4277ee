"""Command-line interface for hybridqed."""
