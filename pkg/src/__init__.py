"""Event-sequence pre-training workbench."""
