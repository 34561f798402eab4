"""Application lifecycle and shared dependencies for the HTTP surface."""
