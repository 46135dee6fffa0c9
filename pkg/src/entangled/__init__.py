"""Entangled-query evaluation engine."""
