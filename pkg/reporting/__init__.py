"""Artifact writers and readers: convergence curves, policy files, run summaries."""
