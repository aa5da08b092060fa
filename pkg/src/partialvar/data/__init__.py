"""Bundled presets and the synthetic multi-country study."""
