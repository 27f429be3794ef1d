"""Command-line harness: configs, experiment registry, runners."""
