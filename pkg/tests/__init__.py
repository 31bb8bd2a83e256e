"""Tests for qspeckle."""
