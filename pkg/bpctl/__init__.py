"""Command line interface for the biphoton simulator."""
