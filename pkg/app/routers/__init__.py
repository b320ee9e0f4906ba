"""Command-line surface: one sub-command module per operation under ``cli``."""
