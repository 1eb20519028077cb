"""Tests for tamedlib.montecarlo."""
