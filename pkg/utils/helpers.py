import csv
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

logger = logging.getLogger(__name__)


def format_float(value: float) -> str:
    """Format a float with 9 significant digits, scientific below 1e-3."""
    if value is None:
        return ""
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    if value == 0:
        return "0"
    if abs(value) < 1e-3:
        return f"{value:.8e}"
    return f"{value:.9g}"


def format_cell(value: Any) -> str:
    """Format one CSV cell; floats go through format_float."""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return format_float(value)
    if value is None:
        return ""
    return str(value)


def branch_names(count: int) -> List[str]:
    """Names of `count` ascending polariton branches."""
    if count <= 0:
        return []
    if count == 1:
        return ["C"]
    if count == 2:
        return ["LP", "UP"]
    if count == 3:
        return ["LP", "MP", "UP"]
    return ["LP"] + [f"MP{k}" for k in range(1, count - 1)] + ["UP"]


def branch_index(hint: str, count: int) -> int:
    """0-based branch from a name produced by branch_names(count) or from an integer string."""
    text = hint.strip()
    names = branch_names(count)
    if text.upper() in names:
        return names.index(text.upper())
    try:
        return int(text)
    except ValueError:
        raise ValueError(f"unknown branch {hint!r}; expected 0..{count - 1} or one of {', '.join(names)}") from None


def parabola_vertex(xs: Sequence[float], ys: Sequence[float]) -> Tuple[float, Optional[float]]:
    """Curvature and vertex abscissa of the parabola through three points.

    The vertex is None when the points are collinear or two abscissae coincide.
    """
    (x0, x1, x2), (y0, y1, y2) = xs, ys
    denom = (x0 - x1) * (x0 - x2) * (x1 - x2)
    if denom == 0:
        return 0.0, None
    a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom
    b = (x2 ** 2 * (y0 - y1) + x1 ** 2 * (y2 - y0) + x0 ** 2 * (y1 - y2)) / denom
    if a == 0:
        return 0.0, None
    return float(a), float(-b / (2 * a))


def ensure_parent(path: Path) -> Path:
    """Create the parent directory of an output file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def metadata_path(path: Path) -> Path:
    """Sidecar path: results.csv -> results.meta.json."""
    path = Path(path)
    return path.with_name(f"{path.stem}.meta.json")


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    """Write a CSV with a mandatory header row and deterministic formatting."""
    path = ensure_parent(path)
    count = 0
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_cell(v) for v in row])
            count += 1
    logger.info(f"Wrote {count} rows to {path}")
    return path


def read_csv(path: Path) -> Tuple[List[str], Iterator[Tuple[int, List[str]]]]:
    """Header and (line number, values) pairs; blank lines are skipped."""
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as handle:
        lines = handle.read().splitlines()
    reader = csv.reader(lines)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        return [], iter(())

    def rows():
        for line_number, values in enumerate(reader, start=2):
            if not values or all(not v.strip() for v in values):
                continue
            yield line_number, values

    return header, rows()


def write_json(path: Path, data: Dict[str, Any]) -> Path:
    """Write JSON with sorted keys so repeated runs are byte-identical."""
    path = ensure_parent(path)
    with open(path, "w") as handle:
        json.dump(data, handle, indent=2, sort_keys=True)
        handle.write("\n")
    return path


def read_json(path: Path) -> Dict[str, Any]:
    with open(path) as handle:
        return json.load(handle)


def format_duration(seconds: float) -> str:
    """Format a duration in seconds to human readable format."""
    if seconds < 1:
        return f"{seconds * 1000:.0f} ms"
    if seconds < 60:
        return f"{seconds:.1f} s"
    minutes = int(seconds // 60)
    return f"{minutes} min {seconds - 60 * minutes:.0f} s"
