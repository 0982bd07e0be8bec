"""Tests for the gqdemon package."""
