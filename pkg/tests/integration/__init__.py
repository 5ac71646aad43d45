"""Integration tests for catamp."""
