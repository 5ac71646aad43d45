"""Experiments composed from the engines."""
