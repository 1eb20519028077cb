"""Tests for tamedlib.scheme."""
