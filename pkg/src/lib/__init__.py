"""Shared utilities and infrastructure for hybridqed."""
