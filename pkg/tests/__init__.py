"""Test suite for catamp."""
