"""Output bundles: guarded directories, result writers, SVG layouts and manifests."""

import hashlib
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402
from matplotlib.patches import Circle  # noqa: E402

from . import __version__  # noqa: E402
from .dynamics import FarmDesign, PerformanceReport, PowerMatrix  # noqa: E402
from .errors import InvalidArgumentError, OutputExistsError  # noqa: E402

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
CSV_FLOAT_FORMAT = "%.17g"

# SVG output without random ids or dates
plt.rcParams["svg.hashsalt"] = "wecfarm"


def prepare_output(path: Union[str, Path], force: bool = False) -> Path:
    """
    Create the output directory.

    Raises:
        OutputExistsError: If it exists with content and force is not set
    """
    path = Path(path)
    if path.exists() and not path.is_dir():
        raise OutputExistsError(f"output path {path} exists and is not a directory")
    if path.is_dir() and any(path.iterdir()) and not force:
        raise OutputExistsError(f"output directory {path} is not empty (use --force to overwrite)")
    path.mkdir(parents=True, exist_ok=True)
    return path


def _plain(value: Any) -> Any:
    """JSON-safe copy: numpy scalars unwrapped, non-finite floats become null."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, Path):
        return str(value)
    return value


def write_json(path: Path, data: Dict[str, Any]):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(_plain(data), f, indent=2, sort_keys=True)
        f.write("\n")


def write_frame(path: Path, frame: pd.DataFrame):
    frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")


def layout_frame(designs: Sequence[Tuple[str, FarmDesign]], safety_distance: float) -> pd.DataFrame:
    """One row per device: case, device, x_m, y_m, radius_m, exclusion_radius_m."""
    rows = []
    for label, design in designs:
        for index, (x, y) in enumerate(design.layout, start=1):
            rows.append(
                {
                    "case": label,
                    "device": index,
                    "x_m": x,
                    "y_m": y,
                    "radius_m": design.geom.radius,
                    "exclusion_radius_m": design.geom.radius + safety_distance / 2.0,
                }
            )
    return pd.DataFrame(
        rows, columns=["case", "device", "x_m", "y_m", "radius_m", "exclusion_radius_m"]
    )


def draw_layouts(
    path: Path, designs: Sequence[Tuple[str, FarmDesign]], safety_distance: float
):
    """
    SVG drawing of farm layouts to scale.

    Each body is a filled disc of radius R; the dashed circle of diameter
    2R + safety_distance marks the exclusion zone, so discs of two bodies
    touch exactly at the minimum allowed spacing.
    """
    if not designs:
        return
    n = len(designs)
    cols = min(n, 3)
    rows = math.ceil(n / cols)
    fig, axes = plt.subplots(rows, cols, figsize=(4.0 * cols, 4.0 * rows), squeeze=False)
    for ax in axes.ravel()[n:]:
        ax.set_visible(False)

    for ax, (label, design) in zip(axes.ravel(), designs):
        radius = design.geom.radius
        exclusion = radius + safety_distance / 2.0
        for index, (x, y) in enumerate(design.layout, start=1):
            ax.add_patch(Circle((x, y), exclusion, fill=False, linestyle="--", color="tab:orange"))
            ax.add_patch(Circle((x, y), radius, color="tab:blue"))
            ax.annotate(str(index), (x, y), ha="center", va="center", color="white", fontsize=8)
        points = design.points
        margin = exclusion * 1.5
        ax.set_xlim(points[:, 0].min() - margin, points[:, 0].max() + margin)
        ax.set_ylim(points[:, 1].min() - margin, points[:, 1].max() + margin)
        ax.set_aspect("equal")
        ax.set_xlabel("x (m)")
        ax.set_ylabel("y (m)")
        ax.set_title(label, fontsize=9)
        ax.annotate("", xy=(0.95, 0.05), xytext=(0.75, 0.05), xycoords="axes fraction",
                    arrowprops={"arrowstyle": "->"})

    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _power_frame(labelled: Iterable[Tuple[str, PowerMatrix]]) -> Optional[pd.DataFrame]:
    frames = []
    for label, pm in labelled:
        frame = pm.to_frame()
        frame.insert(0, "case", label)
        frames.append(frame)
    return pd.concat(frames, ignore_index=True) if frames else None


def write_report_bundle(
    out: Path,
    design: FarmDesign,
    report: PerformanceReport,
    pm: PowerMatrix,
    safety_distance: float,
    extra: Optional[Dict[str, Any]] = None,
) -> List[str]:
    """
    Files of a single-design evaluation: report.json, power_matrix.csv,
    layout.csv, layout.svg.

    Returns:
        Names of the files written
    """
    data = {"design": design.to_dict(), "report": report.to_dict()}
    if extra:
        data.update(extra)
    write_json(out / "report.json", data)
    pm.write_csv(out / "power_matrix.csv")
    designs = [("design", design)]
    write_frame(out / "layout.csv", layout_frame(designs, safety_distance))
    draw_layouts(out / "layout.svg", designs, safety_distance)
    return ["report.json", "power_matrix.csv", "layout.csv", "layout.svg"]


def write_study_bundle(out: Path, result, safety_distance: float) -> List[str]:
    """
    Files of a study: result.json, table.csv, trace.csv, layout.csv,
    layout.svg, power_matrix.csv and field.csv where they apply.

    Args:
        out: Prepared output directory
        result: StudyResult
        safety_distance: Minimum clearance drawn around each body

    Returns:
        Names of the files written
    """
    written = ["result.json", "table.csv"]
    write_json(out / "result.json", result.to_dict())
    write_frame(out / "table.csv", result.table())

    traces = []
    for case in result.cases:
        for run in (case.ga, case.local):
            if run is None:
                continue
            frame = run.trace_frame()
            frame.insert(0, "solver", run.solver)
            frame.insert(0, "case", case.label)
            traces.append(frame)
    if traces:
        write_frame(out / "trace.csv", pd.concat(traces, ignore_index=True))
        written.append("trace.csv")

    designs = [(c.label, c.design) for c in result.cases if c.design is not None]
    if designs:
        write_frame(out / "layout.csv", layout_frame(designs, safety_distance))
        draw_layouts(out / "layout.svg", designs, safety_distance)
        written += ["layout.csv", "layout.svg"]

    power = _power_frame((c.label, c.power_matrix) for c in result.cases if c.power_matrix is not None)
    if power is not None:
        write_frame(out / "power_matrix.csv", power)
        written.append("power_matrix.csv")

    if result.field is not None:
        write_frame(out / "field.csv", result.field)
        written.append("field.csv")
    return written


def file_digest(path: Union[str, Path]) -> str:
    sha = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            sha.update(chunk)
    return sha.hexdigest()


def write_manifest(
    out: Path,
    argv: Sequence[str],
    config: Dict[str, Any],
    seed: Optional[int],
    inputs: Iterable[Union[str, Path]],
    outputs: Iterable[str],
    name: str = MANIFEST_NAME,
) -> Path:
    """
    manifest.json: invocation, resolved configuration, seed, version and
    digests of every input and output file.
    """
    data = {
        "version": __version__,
        "argv": list(argv),
        "seed": seed,
        "config": config,
        "inputs": {str(Path(p)): file_digest(p) for p in inputs},
        "outputs": {name: file_digest(out / name) for name in sorted(outputs)},
    }
    path = out / name
    write_json(path, data)
    return path


def load_manifest(path: Union[str, Path]) -> Dict[str, Any]:
    """
    Read a manifest and verify its input digests.

    Raises:
        InvalidArgumentError: If the manifest is unreadable or an input changed
    """
    path = Path(path)
    try:
        with open(path, encoding="utf-8") as f:
            manifest = json.load(f)
    except FileNotFoundError as e:
        raise InvalidArgumentError(f"manifest not found: {path}") from e
    except json.JSONDecodeError as e:
        raise InvalidArgumentError(f"invalid manifest {path}: {e}") from e
    for key in ("argv", "inputs", "outputs"):
        if key not in manifest:
            raise InvalidArgumentError(f"manifest {path} lacks '{key}'")

    for name, digest in manifest["inputs"].items():
        if not Path(name).exists():
            raise InvalidArgumentError(f"manifest input {name} is missing")
        if file_digest(name) != digest:
            raise InvalidArgumentError(f"manifest input {name} changed since the recorded run")
    return manifest


def compare_outputs(manifest: Dict[str, Any], out: Path) -> List[str]:
    """Names of recorded outputs whose digest differs in out (or that are missing)."""
    mismatched = []
    for name, digest in sorted(manifest["outputs"].items()):
        path = out / name
        if not path.exists() or file_digest(path) != digest:
            mismatched.append(name)
    return mismatched
