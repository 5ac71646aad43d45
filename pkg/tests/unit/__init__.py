"""Unit tests for catamp."""
