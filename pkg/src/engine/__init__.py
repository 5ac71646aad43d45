"""Numerical engines: the truncated Fock engine and the closed-form Q engine."""
