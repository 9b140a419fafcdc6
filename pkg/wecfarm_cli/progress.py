"""Progress bars for studies, sweeps and optimizer generations."""

from typing import Dict, Optional

from rich.console import Console
from rich.progress import (
    BarColumn,
    MofNCompleteColumn,
    Progress,
    SpinnerColumn,
    TaskID,
    TextColumn,
    TimeElapsedColumn,
)

console = Console(stderr=True)


class StudyProgress:
    """
    Progress display for long runs.

    Used as the progress object of run_study: step() marks a new case,
    start/update/complete drive a bar for sweeps, and on_generation can be
    passed to run_ga. Disabled instances only echo steps as dim lines.
    """

    def __init__(self, enabled: bool = True):
        """
        Initialize the display.

        Args:
            enabled: Whether to draw live bars
        """
        self.enabled = enabled
        self.progress: Optional[Progress] = None
        self.task: Optional[TaskID] = None
        self.completed = 0
        self.total = 0

    def start(self, total: Optional[int] = None, description: str = "Working"):
        """
        Start a bar.

        Args:
            total: Number of units if known
            description: Initial description
        """
        if not self.enabled:
            return
        self.stop()
        self.total = total or 0
        self.completed = 0

        columns = [SpinnerColumn(), TextColumn("[bold cyan]{task.description}")]
        if total:
            columns += [BarColumn(), MofNCompleteColumn()]
        columns.append(TimeElapsedColumn())
        self.progress = Progress(*columns, console=console, transient=True)
        self.progress.start()
        self.task = self.progress.add_task(description, total=total)

    def update(self, description: Optional[str] = None, advance: int = 1):
        """Advance the bar, optionally replacing its description."""
        if not self.enabled or not self.progress:
            return
        self.completed += advance
        self.progress.update(self.task, advance=advance)
        if description:
            self.progress.update(self.task, description=description)

    def step(self, description: str):
        """Announce a new case or phase."""
        if not self.enabled or not self.progress:
            console.print(f"[dim]→ {description}[/dim]")
            return
        self.progress.update(self.task, description=description)

    def on_generation(self, generation: int, row: Dict):
        """run_ga callback: show the best objective so far."""
        self.step(
            f"Generation {generation}: best {row['best_objective']:.4g} "
            f"({row['n_feasible']} feasible)"
        )

    def complete(self, message: str = "Complete"):
        if not self.enabled or not self.progress:
            return
        if self.total:
            self.progress.update(self.task, completed=self.total)
        self.stop()
        console.print(f"[green]✓ {message}[/green]")

    def stop(self):
        if not self.progress:
            return
        self.progress.stop()
        self.progress = None
        self.task = None

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.stop()
