"""Property-based tests for catamp using Hypothesis."""
