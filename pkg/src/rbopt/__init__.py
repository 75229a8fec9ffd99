"""Sampling-strategy optimization for randomized benchmarking."""
