"""Hybrid DFS / LEO protection of logical qubits under non-Markovian baths."""

__version__ = "0.3.0"
