"""Console rendering of climates, reports and study results."""

import json
from typing import Any, Dict, Iterable, List, Optional

import pandas as pd
from rich.console import Console
from rich.panel import Panel
from rich.syntax import Syntax
from rich.table import Table

from .dynamics import FarmDesign, PerformanceReport
from .waves import YearSummary

console = Console()

SUMMARY_COLUMNS = (
    ("case", "Case"),
    ("p_limit_W", "p_limit (kW)"),
    ("radius_m", "R (m)"),
    ("aspect_ratio", "AR"),
    ("b_pto", "b_pto (kNs/m)"),
    ("k_pto", "k_pto (kN/m)"),
    ("power_W", "P (kW)"),
    ("q_factor", "q"),
    ("feasible", "Feasible"),
)
KILO_COLUMNS = {"p_limit_W", "b_pto", "k_pto", "power_W"}


def _fmt(value: Any, kilo: bool = False) -> str:
    if value is None or (isinstance(value, float) and value != value):
        return "-"
    if isinstance(value, bool):
        return "yes" if value else "[red]no[/red]"
    if isinstance(value, (int, float)):
        return f"{value / 1e3:.4g}" if kilo else f"{value:.4g}"
    return str(value)


class DisplayManager:
    """
    Renders results in the configured mode.

    Modes:
    - table: rich tables (default)
    - json: syntax-highlighted JSON panels
    """

    def __init__(self, config: Dict):
        """
        Initialize display manager.

        Args:
            config: Configuration dict with display_mode
        """
        self.display_mode = config.get("display_mode", "table")

    def _json(self, title: str, data: Dict[str, Any]):
        text = json.dumps(data, indent=2, sort_keys=True, default=str)
        syntax = Syntax(text, "json", theme="monokai", line_numbers=False)
        console.print(Panel(syntax, title=title, border_style="cyan"))

    def show_climate_summary(self, site_id: str, rows: List[YearSummary]):
        """Per-year normalization and resource summary of a climate."""
        if self.display_mode == "json":
            self._json(site_id, {"years": [r.__dict__ for r in rows]})
            return
        table = Table(title=f"Site climate {site_id}")
        for header in ("Year", "Mean Hs (m)", "Mean Tp (s)", "Flux (kW/m)", "Σ prob"):
            table.add_column(header, justify="right")
        for row in rows:
            table.add_row(
                str(row.year),
                f"{row.mean_hs:.3f}",
                f"{row.mean_tp:.3f}",
                f"{row.energy_flux_kw:.2f}",
                f"{row.total_prob:.9f}",
            )
        console.print(table)

    def show_report(self, design: FarmDesign, report: PerformanceReport):
        """Headline numbers of one evaluated design."""
        if self.display_mode == "json":
            self._json("Performance", {"design": design.to_dict(), "report": report.to_dict()})
            return
        table = Table(title=f"{design.n_wec}-device farm", show_header=False)
        table.add_column("Quantity", style="cyan")
        table.add_column("Value", justify="right")
        omega_n = report.natural_frequency
        rows = [
            ("Weighted power P", f"{report.weighted_power / 1e3:.4g} kW"),
            ("Unsaturated power", f"{report.weighted_power_unsaturated / 1e3:.4g} kW"),
            ("Power per volume p_v", f"{report.p_v:.4g} W/m³"),
            ("q-factor", f"{report.q_factor:.4f}"),
            ("Natural frequency ω_n", "-" if omega_n is None else f"{omega_n:.4f} rad/s"),
            (
                "Peak bin",
                f"{report.peak_bin_power / 1e3:.4g} kW at Hs={report.peak_bin[0]:g} m, "
                f"Tp={report.peak_bin[1]:g} s",
            ),
        ]
        if report.capacity_factor is not None:
            rows.append(("Capacity factor", f"{report.capacity_factor:.3f}"))
        for name, value in rows:
            table.add_row(name, value)
        console.print(table)
        for warning in report.warnings:
            console.print(f"[yellow]{warning}[/yellow]")

    def show_study(self, preset: str, table: pd.DataFrame, truncated: bool = False):
        """Summary table of a study."""
        if self.display_mode == "json":
            self._json(preset, {"cases": table.to_dict(orient="records")})
            return
        if table.empty:
            console.print(f"[dim]→ {preset}: no per-case summary[/dim]")
            return
        columns = [(key, header) for key, header in SUMMARY_COLUMNS if key in table.columns]
        out = Table(title=f"Study {preset}")
        for _, header in columns:
            out.add_column(header, justify="left" if header == "Case" else "right")
        for record in table.to_dict(orient="records"):
            out.add_row(*(_fmt(record.get(key), key in KILO_COLUMNS) for key, _ in columns))
        console.print(out)
        if truncated:
            console.print("[yellow]Evaluation budget reached; results are partial[/yellow]")

    def show_frame(self, title: str, frame: pd.DataFrame, limit: Optional[int] = 20):
        """First rows of a tabular result (field, smoothing, regular sweep)."""
        if self.display_mode == "json":
            self._json(title, {"rows": frame.head(limit).to_dict(orient="records")})
            return
        table = Table(title=title)
        for column in frame.columns:
            table.add_column(str(column), justify="right")
        for record in frame.head(limit).itertuples(index=False):
            table.add_row(*(_fmt(v) for v in record))
        console.print(table)
        if limit is not None and len(frame) > limit:
            console.print(f"[dim]… {len(frame) - limit} more rows[/dim]")

    def show_files(self, out, names: Iterable[str]):
        for name in names:
            console.print(f"[green]✓ Wrote {out / name}[/green]")
