"""Tests for restricted-mc-lab."""
