"""Exact symbolic engine and numeric harness for the differential calculus on quantum Euclidean space."""
