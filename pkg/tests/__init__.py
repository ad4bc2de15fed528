"""Test suite for lade-lab."""
