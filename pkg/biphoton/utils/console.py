"""Rich-backed logging and summary tables for the command line."""
from __future__ import annotations

import logging
from typing import Iterable, Optional, Sequence

from rich import box
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

_HANDLER_NAME = "biphoton-rich"


def setup_logging(verbose: bool = False, console: Optional[Console] = None) -> logging.Logger:
    """Route the ``biphoton`` logger tree to a RichHandler on stderr."""
    logger = logging.getLogger("biphoton")
    logger.setLevel(logging.DEBUG if verbose else logging.INFO)
    for handler in list(logger.handlers):
        if handler.get_name() == _HANDLER_NAME:
            logger.removeHandler(handler)
    handler = RichHandler(
        console=console or Console(stderr=True),
        show_time=False,
        show_path=verbose,
        markup=False,
        rich_tracebacks=verbose,
    )
    handler.set_name(_HANDLER_NAME)
    handler.setFormatter(logging.Formatter("%(message)s"))
    logger.addHandler(handler)
    return logger


def summary_table(title: str, rows: Iterable[Sequence[str]], columns: Sequence[str] = ("quantity", "value")) -> Table:
    table = Table(title=title, box=box.SIMPLE_HEAVY, show_lines=False)
    table.add_column(columns[0], style="cyan", no_wrap=True)
    for name in columns[1:]:
        table.add_column(name, justify="right")
    for row in rows:
        table.add_row(*row)
    return table


def render(table: Table, console: Optional[Console] = None) -> None:
    (console or Console()).print(table)
