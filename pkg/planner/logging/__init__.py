"""Logging utilities for the planner."""
