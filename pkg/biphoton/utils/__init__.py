"""Artifact writers and console helpers for biphoton."""
