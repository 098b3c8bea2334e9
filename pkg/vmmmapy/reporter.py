"""Console reporting for the command line"""
from __future__ import annotations

# Built-in
import warnings
from contextlib import contextmanager
from typing import Any, Iterator, Mapping

# Rich
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

__all__: tuple[str, ...] = ("Reporter",)


class Reporter:
    """
    Writes INFO, WARN and ERROR lines and summary panels to stderr.

    ### Arguments
    - quiet (bool): Silence INFO lines and summaries
    - console (Console | None): Console to write to, stderr by default

    ### Returns
    - None
    """

    def __init__(self, quiet: bool = False, console: Console | None = None) -> None:
        self.quiet = quiet
        self.console = console or Console(stderr=True)

    def log(self, data: Any) -> None:
        if not self.quiet:
            self.console.log("[black on grey37] INFO [/]", data)

    def warn(self, data: Any) -> None:
        self.console.log("[black on yellow] WARN [/]", data)

    def error(self, data: Any) -> None:
        self.console.log("[black on red] ERROR [/]", data)

    def summary(self, title: str, rows: Mapping[str, Any]) -> None:
        """
        Render name/value rows inside a panel.

        ### Arguments
        - title (str): Panel title
        - rows (Mapping[str, Any]): Values, estimates are shown with their standard error

        ### Returns
        - None
        """
        if self.quiet:
            return
        table = Table.grid(padding=(0, 2))
        table.add_column(style="cyan")
        table.add_column(justify="right")
        for name, value in rows.items():
            if isinstance(value, Mapping) and "value" in value and "se" in value:
                text = f"{value['value']:.6g} ± {value['se']:.2g}"
            elif isinstance(value, float):
                text = f"{value:.6g}"
            else:
                text = str(value)
            table.add_row(name, text)
        self.console.print(Panel(table, title=title, expand=False))

    @contextmanager
    def forward_warnings(self) -> Iterator[None]:
        """Collect warnings raised inside the block and report each one"""
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            try:
                yield
            finally:
                for item in caught:
                    self.warn(f"{item.category.__name__}: {item.message}")
