"""Tests for tamedlib.cli."""
