"""Tests for the otfs_array package."""
