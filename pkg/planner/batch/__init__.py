"""Batch processing of scenario runs."""
