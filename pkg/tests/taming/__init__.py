"""Tests for tamedlib.taming."""
