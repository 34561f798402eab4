"""Pickup-and-delivery routing with time windows and battery limits."""
