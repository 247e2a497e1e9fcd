"""Morse-Bott structure of trace functions on orthogonal groups."""
