#!/usr/bin/env python3
"""Main CLI entry point for wecfarm."""

import argparse
import logging
import sys
from dataclasses import asdict
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd
from rich.console import Console
from rich.logging import RichHandler

from . import __version__
from .backends import BackendFactory
from .bundle import (
    MANIFEST_NAME,
    compare_outputs,
    load_manifest,
    prepare_output,
    write_frame,
    write_manifest,
    write_report_bundle,
    write_study_bundle,
)
from .cache import CACHE_SUBDIR, CoefficientCache
from .config import SimulationSettings, WecFarmConfig
from .display import DisplayManager
from .dynamics import evaluate_performance, frequency_grid
from .errors import InfeasibleDesignError, InvalidArgumentError, OutputExistsError, WecFarmError
from .progress import StudyProgress
from .studies import (
    PRESET_ALIASES,
    SYNTH_PREFIX,
    StudySpec,
    available_presets,
    get_preset,
    parse_p_limit,
    parse_wave,
    resolve_climate,
    run_study,
)
from .waves import PROFILES, load_site_climate, regular_climate, synth_site_climate, write_site_climate

console = Console()
logger = logging.getLogger("wecfarm_cli")


def setup_logging(verbosity: int):
    """RichHandler on the package logger: WARNING, -v INFO, -vv DEBUG."""
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbosity, logging.DEBUG)
    logger.handlers.clear()
    logger.addHandler(RichHandler(console=Console(stderr=True), show_path=False, markup=False))
    logger.setLevel(level)
    logger.propagate = False


class WecFarmCLI:
    """Runs one subcommand against a resolved configuration."""

    def __init__(self, config: WecFarmConfig, args: argparse.Namespace, argv: Sequence[str]):
        """
        Initialize the CLI.

        Args:
            config: Configuration with command-line overrides applied
            args: Parsed arguments
            argv: Raw arguments, recorded in the manifest
        """
        self.config = config
        self.args = args
        self.argv = list(argv)
        self.settings = SimulationSettings.from_config(config.get_all())
        self.display = DisplayManager(config.get_all())
        self.inputs: List[Path] = []
        if config.config_file is not None:
            self.inputs.append(config.config_file)

        cache_dir = config.get("cache_dir")
        self.cache = CoefficientCache(cache_dir if config.get("cache_enabled", True) else None)

    # Helpers ------------------------------------------------------------

    def _out(self, cache: bool = True) -> Path:
        if not self.args.out:
            raise InvalidArgumentError(f"{self.args.command} needs --out DIR")
        out = prepare_output(self.args.out, self.args.force)
        if cache and self.config.get("cache_enabled", True) and self.config.get("cache_dir") is None:
            self.cache.attach(out / CACHE_SUBDIR)
        return out

    def _finish(self, out: Path, written: List[str], seed: Optional[int], manifest: str = MANIFEST_NAME):
        write_manifest(out, self.argv, self.config.get_all(), seed, self.inputs, written, manifest)
        self.display.show_files(out, written + [manifest])

    def _climate(self):
        wave = parse_wave(self.config.get("wave"))
        if wave is not None:
            return regular_climate(wave)
        ref = str(self.config.get("climate"))
        if not ref.startswith(SYNTH_PREFIX):
            self.inputs.append(Path(ref))
        return resolve_climate(ref, int(self.config.get("seed", 0)), int(self.config.get("n_years")))

    def _design_spec(self) -> StudySpec:
        return StudySpec(preset="design", solver="evaluate").updated(self.config.section("design"))

    def _backend(self, name: Optional[str] = None):
        return BackendFactory.create_backend(
            name or self.settings.backend,
            cache=self.cache,
            n_terms=self.settings.n_terms,
            order=self.settings.ms_order,
            rho=self.settings.rho,
            gravity=self.settings.gravity,
        )

    # Subcommands ----------------------------------------------------------

    def cmd_site(self) -> int:
        """Generate or check a site climate and print its yearly summary."""
        args = self.args
        if args.check:
            climate = load_site_climate(args.check)
            self.display.show_climate_summary(climate.site_id, climate.summary())
            console.print(f"[green]✓ {args.check}: every year normalizes[/green]")
            return 0
        if not args.synth:
            raise InvalidArgumentError("site needs --synth PROFILE or --check FILE")
        if args.out:
            # -o names the climate file inside the run directory
            out = self._out(cache=False)
            output = out / (Path(args.output).name if args.output else "climate.csv")
            manifest = MANIFEST_NAME
        elif args.output:
            output = Path(args.output)
            if output.exists() and not args.force:
                raise OutputExistsError(f"{output} exists (use --force to overwrite)")
            out = output.parent
            out.mkdir(parents=True, exist_ok=True)
            manifest = f"{output.stem}.{MANIFEST_NAME}"
        else:
            raise InvalidArgumentError("site --synth needs -o FILE or --out DIR")

        seed = int(self.config.get("seed", 0))
        climate = synth_site_climate(args.synth, seed, int(self.config.get("n_years")))
        summary = climate.summary()
        write_site_climate(climate, output)
        summary_path = out / f"{output.stem}_summary.csv"
        write_frame(summary_path, pd.DataFrame([asdict(row) for row in summary]))
        self.display.show_climate_summary(climate.site_id, summary)
        self._finish(out, [output.name, summary_path.name], seed, manifest)
        return 0

    def cmd_hydro(self) -> int:
        """Dump array coefficients of the configured design over the grid."""
        design = self._design_spec().design(self.settings)
        backend = self._backend()
        out = self._out()
        grid = frequency_grid(self.settings)
        rows = []
        for omega in grid.omegas:
            hydro = backend.array_hydro(design.points, design.geom, float(omega), self.settings.heading)
            for p in range(design.n_wec):
                for q in range(design.n_wec):
                    rows.append(
                        {
                            "omega": float(omega),
                            "body_p": p + 1,
                            "body_q": q + 1,
                            "A_pq": float(hydro.A[p, q]),
                            "B_pq": float(hydro.B[p, q]),
                            "ReX_p": float(hydro.X[p].real),
                            "ImX_p": float(hydro.X[p].imag),
                        }
                    )
            for warning in hydro.warnings:
                logger.warning(warning)
        write_frame(out / "hydro.csv", pd.DataFrame(rows))
        self.cache.flush()
        self._finish(out, ["hydro.csv"], None)
        return 0

    def cmd_simulate(self) -> int:
        """Evaluate one design on the configured climate."""
        design = self._design_spec().design(self.settings)
        violations = design.spacing_violations(self.settings.safety_distance)
        if violations:
            raise InfeasibleDesignError(
                f"layout violates the minimum spacing of "
                f"{2 * design.geom.radius + self.settings.safety_distance:g} m",
                violations,
            )
        climate = self._climate()
        p_limit = parse_p_limit(self.config.get("p_limit"))
        backend = self._backend()
        out = self._out()
        console.print(f"[dim]→ Evaluating on {climate.site_id} with the {backend.variant} backend[/dim]")
        report, pm = evaluate_performance(design, climate, p_limit, backend, self.settings)
        self.display.show_report(design, report)
        written = write_report_bundle(
            out, design, report, pm, self.settings.safety_distance,
            extra={"climate": climate.site_id, "backend": backend.variant, "p_limit": p_limit},
        )
        self.cache.flush()
        self._finish(out, written, int(self.config.get("seed", 0)))
        return 0

    def _study_spec(self, default_preset: str) -> StudySpec:
        args = self.args
        if args.study:
            self.inputs.append(Path(args.study))
            spec = StudySpec.from_toml(args.study)
        else:
            spec = get_preset(args.preset or default_preset)
        overrides: Dict[str, Any] = dict(self.config.section("study"))

        sources = self.config.sources
        if sources.get("seed") != "default":
            overrides["seed"] = int(self.config.get("seed"))
        if sources.get("backend") != "default":
            overrides["backend"] = self.settings.backend
        if sources.get("p_limit") != "default":
            overrides["p_limits"] = [self.config.get("p_limit")]
        if sources.get("wave") != "default":
            overrides["wave"] = self.config.get("wave")
        if sources.get("climate") != "default":
            ref = str(self.config.get("climate"))
            overrides["climates"] = [ref]
            # per-case climates would otherwise win
            overrides["cases"] = [
                {k: v for k, v in case.items() if k != "climates"} for case in spec.cases
            ]
            if not ref.startswith(SYNTH_PREFIX):
                self.inputs.append(Path(ref))
        spec = spec.updated(overrides)

        ga = {
            "population": self.config.get("ga_population"),
            "generations": self.config.get("ga_generations"),
            "max_evaluations": self.config.get("max_evaluations"),
        }
        local = {
            "multi_start": self.config.get("local_multi_start"),
            "max_evaluations": self.config.get("local_max_evaluations"),
            "budget": self.config.get("max_evaluations"),
        }
        explicit = {"ga_population", "ga_generations", "max_evaluations", "local_multi_start"}
        cli = {k for k in explicit if sources.get(k) == "cli"}
        ga = {k: v for k, v in ga.items() if v is not None}
        local = {k: v for k, v in local.items() if v is not None}
        merged_ga = {**ga, **spec.ga}
        merged_local = {**local, **spec.local}
        if "ga_population" in cli:
            merged_ga["population"] = ga["population"]
        if "ga_generations" in cli:
            merged_ga["generations"] = ga["generations"]
        if "max_evaluations" in cli:
            merged_ga["max_evaluations"] = merged_local["budget"] = ga["max_evaluations"]
        if "local_multi_start" in cli:
            merged_local["multi_start"] = local["multi_start"]
        return spec.updated({"ga": merged_ga, "local": merged_local})

    def _run_study(self, default_preset: str) -> int:
        spec = self._study_spec(default_preset)
        out = self._out()
        console.print(
            f"[dim]→ Study {spec.preset} ({spec.solver}, {spec.backend} backend, seed {spec.seed})[/dim]"
        )
        base_dir = Path(self.args.study).parent if self.args.study else None
        with StudyProgress(enabled=bool(self.config.get("show_progress", True))) as progress:
            result = run_study(
                spec,
                self.settings,
                cache=self.cache,
                progress=progress,
                base_dir=base_dir,
                n_years=int(self.config.get("n_years")),
            )
        self.display.show_study(spec.preset, result.table(), result.truncated)
        if result.field is not None:
            self.display.show_frame(f"{spec.preset} field", result.field)
        for warning in result.warnings:
            console.print(f"[yellow]{warning}[/yellow]")
        written = write_study_bundle(out, result, self.settings.safety_distance)
        self._finish(out, written, spec.seed)
        return 0

    def cmd_optimize(self) -> int:
        return self._run_study("control")

    def cmd_sweep(self) -> int:
        return self._run_study("landscape")

    def run(self) -> int:
        handler = getattr(self, f"cmd_{self.args.command}")
        return handler()


def _common_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--config", default=None, help="TOML configuration file")
    parser.add_argument("--climate", default=None, help="Climate CSV or synth:<profile>[:seed]")
    parser.add_argument("--wave", default=None, help="'irregular' or 'regular:H,T'")
    parser.add_argument(
        "--backend", default=None, choices=[meta.name for meta in BackendFactory.list_available_backends()],
        help="Hydrodynamics backend",
    )
    parser.add_argument("--p-limit", default=None, help="Per-device power limit in W, or 'none'")
    parser.add_argument("--seed", type=int, default=None, help="Seed for every random stream")
    parser.add_argument("--threads", type=int, default=None, help="Maximum worker threads")
    parser.add_argument("--out", default=None, help="Output directory")
    parser.add_argument("--force", action="store_true", help="Overwrite existing output")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v info, -vv debug")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wecfarm",
        description="wecfarm - wave energy farm simulation and co-design studies",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=f"""
Presets:
  {", ".join(available_presets())}
  (also accepted: {", ".join(sorted(PRESET_ALIASES))})

Examples:
  wecfarm site --synth high-energy --seed 7 -o west.csv
  wecfarm site --check west.csv
  wecfarm simulate --config farm.toml --climate west.csv --out runs/sim
  wecfarm optimize --preset control --climate west.csv --p-limit 150e3 --out runs/control
  wecfarm sweep --preset landscape --wave regular:2,10 --out runs/landscape
  wecfarm --replay runs/control/manifest.json --out runs/control-again
        """,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--replay", default=None, help="Rerun the invocation recorded in a manifest")
    parser.add_argument("--out", dest="replay_out", default=None, help="Output directory for --replay")
    parser.add_argument("-v", "--verbose", dest="replay_verbose", action="count", default=0)

    sub = parser.add_subparsers(dest="command")

    site = sub.add_parser("site", help="Generate or check a site climate")
    _common_flags(site)
    site.add_argument("--synth", choices=sorted(PROFILES), help="Synthetic climate profile")
    site.add_argument("--years", type=int, default=None, help="Number of synthetic years")
    site.add_argument("--check", default=None, help="Validate a climate CSV")
    site.add_argument("-o", "--output", default=None, help="Climate CSV to write")

    hydro = sub.add_parser("hydro", help="Dump array hydrodynamic coefficients")
    _common_flags(hydro)

    simulate = sub.add_parser("simulate", help="Evaluate one design")
    _common_flags(simulate)

    for name, help_text in (("optimize", "Run an optimization study"), ("sweep", "Run a parameter sweep")):
        study = sub.add_parser(name, help=help_text)
        _common_flags(study)
        study.add_argument("--preset", default=None, help="Study preset")
        study.add_argument("--study", default=None, help="Study TOML file")
        study.add_argument("--generations", type=int, default=None, help="GA generations")
        study.add_argument("--population", type=int, default=None, help="GA population size")
        study.add_argument("--max-evaluations", type=int, default=None, help="Evaluation budget")
        study.add_argument("--multi-start", type=int, default=None, help="Local search starts")
    return parser


def _cli_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    overrides = {
        "climate": args.climate,
        "wave": args.wave,
        "backend": args.backend,
        "seed": args.seed,
        "threads": args.threads,
        "n_years": getattr(args, "years", None),
        "ga_generations": getattr(args, "generations", None),
        "ga_population": getattr(args, "population", None),
        "max_evaluations": getattr(args, "max_evaluations", None),
        "local_multi_start": getattr(args, "multi_start", None),
    }
    if args.p_limit is not None:
        overrides["p_limit"] = parse_p_limit(args.p_limit)
        # "none" must still count as explicit
        if overrides["p_limit"] is None:
            overrides["p_limit"] = float("inf")
    return overrides


def _replay_argv(recorded: Sequence[str], out: str) -> List[str]:
    argv: List[str] = []
    skip = False
    for token in recorded:
        if skip:
            skip = False
            continue
        if token == "--out":
            skip = True
            continue
        if token.startswith("--out=") or token == "--force":
            continue
        argv.append(token)
    return argv + ["--out", out]


def run(argv: Optional[Sequence[str]] = None) -> int:
    """
    Execute one invocation.

    Returns:
        Process exit status
    """
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.replay:
        setup_logging(args.replay_verbose)
        try:
            manifest = load_manifest(args.replay)
            recorded_out = Path(args.replay).resolve().parent
            out = args.replay_out or f"{recorded_out}-replay"
            console.print(f"[dim]→ Replaying {args.replay} into {out}[/dim]")
            status = run(_replay_argv(manifest["argv"], out))
            if status != 0:
                return status
            mismatched = compare_outputs(manifest, Path(out))
        except WecFarmError as e:
            console.print(f"[red]✗ {e}[/red]")
            return e.exit_code
        if mismatched:
            console.print(f"[red]✗ Outputs differ from the recording: {', '.join(mismatched)}[/red]")
            return 1
        console.print("[green]✓ Replay reproduced every recorded output[/green]")
        return 0

    if args.command is None:
        parser.print_help()
        return 2

    setup_logging(args.verbose)
    try:
        config = WecFarmConfig(args.config)
        config.apply_overrides(_cli_overrides(args))
        return WecFarmCLI(config, args, argv).run()
    except WecFarmError as e:
        console.print(f"[red]✗ {e}[/red]")
        pairs = getattr(e, "pairs", None)
        if pairs:
            for p, q, d in pairs:
                console.print(f"[red]  bodies {p} and {q}: {d:.3f} m apart[/red]")
        return e.exit_code
    except KeyboardInterrupt:
        console.print("[yellow]Interrupted[/yellow]")
        return 130
    except Exception as e:
        if args.verbose >= 2:
            console.print_exception()
        console.print(f"[red]✗ Unexpected error: {e}[/red]")
        return 1


def main():
    """Main entry point."""
    sys.exit(run())


if __name__ == "__main__":
    main()
