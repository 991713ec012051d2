"""Core utilities initialization."""
