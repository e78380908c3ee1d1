import csv
import io
import json
import logging
import os
import tempfile
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.colors import ListedColormap  # noqa: E402

from errors import DomainError  # noqa: E402
from numeric import format_scalar  # noqa: E402
from reports import CSV_COLUMNS, SCHEMA_VERSION, ScanRecord  # noqa: E402
from scan import boundary_curves, record_from_row  # noqa: E402

logger = logging.getLogger(__name__)

REFERENCE_POINTS: Tuple[Tuple[str, float, float], ...] = (
    ("1,1", 1.0, 1.0),
    ("15,10", 15.0, 10.0),
    ("3/2,25", 1.5, 25.0),
    ("6,6", 6.0, 6.0),
    ("8,12", 8.0, 12.0),
    ("2,2", 2.0, 2.0),
)
REGION_COLORS = ("#d95f02", "#1b9e77")  # not subnormal, subnormal


# ----------------------------------------------------------------------
# Atomic writes
# ----------------------------------------------------------------------
def atomic_write(path: str, data: Any, binary: bool = False) -> str:
    """Write through a temp file in the target directory, then rename into place."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(prefix=".partial-", dir=directory)
    try:
        with os.fdopen(fd, "wb" if binary else "w", **({} if binary else {"encoding": "utf-8", "newline": ""})) as f:
            f.write(data)
        os.replace(tmp_path, path)
    except OSError:
        logger.exception("Write to %s failed; removing partial file", path)
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise
    return path


# ----------------------------------------------------------------------
# JSON Emitter
# ----------------------------------------------------------------------
class JsonEmitter:
    """Scan records as one JSON document."""

    suffix = ".json"

    def render(self, records: Sequence[ScanRecord]) -> str:
        payload = {"schema_version": SCHEMA_VERSION, "records": [r.model_dump() for r in records]}
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    def write(self, records: Sequence[ScanRecord], path: str) -> Dict[str, Any]:
        atomic_write(path, self.render(records))
        return {"path": path, "records": len(records), "format": "json"}

    def read(self, path: str, **_: Any) -> List[ScanRecord]:
        with open(path, encoding="utf-8") as f:
            payload = json.load(f)
        if payload.get("schema_version") != SCHEMA_VERSION:
            raise DomainError(f"{path}: unsupported schema_version {payload.get('schema_version')!r}")
        return [ScanRecord(**r) for r in payload["records"]]


# ----------------------------------------------------------------------
# CSV Emitter
# ----------------------------------------------------------------------
class CsvEmitter:
    """
    The fixed CSV_COLUMNS. Roots and flags are recomputed on read; witnesses
    only when the caps of the scan that wrote the file are passed back in.
    """

    suffix = ".csv"

    def render(self, records: Sequence[ScanRecord]) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for record in records:
            writer.writerow(record.csv_row())
        return buf.getvalue()

    def write(self, records: Sequence[ScanRecord], path: str) -> Dict[str, Any]:
        atomic_write(path, self.render(records))
        return {"path": path, "records": len(records), "format": "csv"}

    def read(self, path: str, mode: str = "rational", witness_caps: Optional[Tuple[int, int]] = None,
             **_: Any) -> List[ScanRecord]:
        with open(path, encoding="utf-8", newline="") as f:
            reader = csv.DictReader(f)
            if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
                raise DomainError(f"{path}: expected columns {', '.join(CSV_COLUMNS)}")
            return [record_from_row(row, mode=mode, witness_caps=witness_caps) for row in reader]


# ----------------------------------------------------------------------
# SVG Emitter
# ----------------------------------------------------------------------
class SvgEmitter:
    """
    Region picture: two-colour verdict map, the three analytic boundary
    curves and the six reference points. Artists carry ``gid`` values so the
    SVG elements can be located by id.
    """

    suffix = ".svg"

    def figure(self, records: Sequence[ScanRecord]):
        xs = sorted({r.s1 for r in records}, key=_as_float)
        ys = sorted({r.s2 for r in records}, key=_as_float)
        col = {v: i for i, v in enumerate(xs)}
        row = {v: i for i, v in enumerate(ys)}
        grid = np.full((len(ys), len(xs)), np.nan)
        for r in records:
            grid[row[r.s2], col[r.s1]] = 1.0 if r.subnormal else 0.0

        x = np.array([_as_float(v) for v in xs])
        y = np.array([_as_float(v) for v in ys])
        fig, ax = plt.subplots(figsize=(7, 6))
        mesh = ax.pcolormesh(x, y, np.ma.masked_invalid(grid), cmap=ListedColormap(REGION_COLORS),
                             vmin=0, vmax=1, shading="nearest")
        mesh.set_gid("regions")

        for name, (cx, cy) in boundary_curves(float(x.max()), samples=4000, s2_max=float(y.max())).items():
            (line,) = ax.plot(cx, cy, color="black", linewidth=1.0,
                              linestyle="--" if name.startswith("disc") else "-")
            line.set_gid(f"curve:{name}")

        for label, px, py in REFERENCE_POINTS:
            if x.min() <= px <= x.max() and y.min() <= py <= y.max():
                (marker,) = ax.plot([px], [py], marker="o", color="white", markeredgecolor="black")
                marker.set_gid(f"point:{label}")
                ax.annotate(f"({label})", (px, py), textcoords="offset points", xytext=(4, 4), fontsize=8)

        ax.set_xlim(x.min(), x.max())
        ax.set_ylim(y.min(), y.max())
        ax.set_xlabel("s1")
        ax.set_ylabel("s2")
        ax.set_title("Subnormality of the module tensor product")
        return fig

    def render(self, records: Sequence[ScanRecord]) -> str:
        if not records:
            raise DomainError("nothing to plot: empty scan")
        fig = self.figure(records)
        buf = io.StringIO()
        try:
            fig.savefig(buf, format="svg")
        finally:
            plt.close(fig)
        return buf.getvalue()

    def write(self, records: Sequence[ScanRecord], path: str) -> Dict[str, Any]:
        atomic_write(path, self.render(records))
        return {"path": path, "records": len(records), "format": "svg"}

    def read(self, path: str, **_: Any) -> List[ScanRecord]:
        raise DomainError("SVG output cannot be read back into records")


def _as_float(value: str) -> float:
    num, _, den = value.partition("/")
    return float(num) / float(den) if den else float(num)


# ----------------------------------------------------------------------
# Density samples
# ----------------------------------------------------------------------
def write_density_csv(samples: Iterable[Tuple[Any, Any]], path: str, digits: int = 17) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("t", "w(t)"))
    for t, w in samples:
        writer.writerow((format_scalar(t, digits), format_scalar(w, digits)))
    return atomic_write(path, buf.getvalue())


# ----------------------------------------------------------------------
# Factories
# ----------------------------------------------------------------------
_EMITTERS = {"json": JsonEmitter, "csv": CsvEmitter, "svg": SvgEmitter}


def get_emitter(fmt: str):
    try:
        return _EMITTERS[fmt]()
    except KeyError:
        raise DomainError(f"unknown output format {fmt!r}; choose one of {', '.join(_EMITTERS)}") from None


def emitter_for_path(path: str, default: Optional[str] = None):
    """Pick the emitter from the file suffix, falling back to ``default``."""
    ext = os.path.splitext(path)[1].lower().lstrip(".")
    return get_emitter(ext if ext in _EMITTERS else (default or "json"))
