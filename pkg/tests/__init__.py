"""Tests for wecfarm-cli."""
