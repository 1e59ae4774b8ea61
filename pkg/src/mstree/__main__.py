"""Entry point for `python -m mstree`."""

from mstree.cli import app

app()
