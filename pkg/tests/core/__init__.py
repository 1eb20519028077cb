"""Tests for tamedlib.core."""
