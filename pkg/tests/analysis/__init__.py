"""Tests for tamedlib.analysis."""
