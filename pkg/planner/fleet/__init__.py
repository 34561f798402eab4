"""Scenario configuration, ingestion, pipeline orchestration and reports."""
