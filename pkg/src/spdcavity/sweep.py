"""
Parameter sweeps over the cavity and their CSV/JSON serialization.

Grid points are enumerated in C order over the axes in the order given
(first axis outermost).  Every output file starts with the effective
configuration, so a file can be regenerated from its own metadata.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np

from . import __version__, kernels
from .analysis import CRITICAL_BAND, Regime
from .cavity import CavityParams
from .elements import ParameterError

__all__ = [
    "AxisSpec",
    "SweepResult",
    "sweep",
    "figure_preset",
    "format_float",
    "read_metadata",
    "read_csv",
    "axes_from_metadata",
    "COLUMNS",
]

PARAM_NAMES = ("t", "phi", "theta", "G", "R")
COLUMNS = ("t", "phi", "theta", "G", "R", "n_a", "n_b", "N_total", "K", "regime")
NONNORMAL_TOL = 1e-12
CHUNK = 2048


def format_float(x: float) -> str:
    """12 significant digits; scientific notation for ``|x| < 1e-3`` or ``|x| >= 1e6``."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    ax = abs(x)
    if ax < 1e-3 or ax >= 1e6:
        return f"{x:.11e}"
    decimals = max(0, 11 - math.floor(math.log10(ax)))
    return f"{x:.{decimals}f}"


@dataclass(frozen=True)
class AxisSpec:
    """Either an evenly spaced grid ``start:stop:num`` or an explicit list of values."""

    start: float | None = None
    stop: float | None = None
    num: int | None = None
    values: tuple[float, ...] | None = None

    @classmethod
    def parse(cls, text: str) -> "AxisSpec":
        """Parse ``"start:stop:num"`` or ``"v1,v2,..."``."""
        text = text.strip()
        try:
            if ":" in text:
                start, stop, num = text.split(":")
                return cls(float(start), float(stop), int(num))
            if not text:
                return cls(values=())
            return cls(values=tuple(float(v) for v in text.split(",")))
        except ValueError as exc:
            raise ParameterError(f"cannot parse grid spec {text!r}: {exc}") from None

    @classmethod
    def coerce(cls, obj) -> "AxisSpec":
        if isinstance(obj, AxisSpec):
            return obj
        if isinstance(obj, str):
            return cls.parse(obj)
        if isinstance(obj, Mapping):
            if "values" in obj:
                return cls(values=tuple(float(v) for v in obj["values"]))
            return cls(float(obj["start"]), float(obj["stop"]), int(obj["num"]))
        return cls(values=tuple(float(v) for v in np.atleast_1d(obj)))

    def to_json(self) -> dict:
        if self.values is not None:
            return {"values": list(self.values)}
        return {"start": self.start, "stop": self.stop, "num": self.num}

    def grid(self, name: str) -> np.ndarray:
        if self.values is not None:
            g = np.array(self.values, dtype=float)
        else:
            if self.num is None or self.num < 0:
                raise ParameterError(f"axis {name}: number of points must be >= 0")
            g = np.linspace(self.start, self.stop, self.num)
        if g.size == 0:
            raise ParameterError(f"axis {name} is empty")
        if not np.all(np.isfinite(g)):
            raise ParameterError(f"axis {name} contains non-finite values")
        if g.size > 1 and not (np.all(np.diff(g) > 0) or np.all(np.diff(g) < 0)):
            raise ParameterError(f"axis {name} must be strictly monotone")
        return g


@dataclass(frozen=True, eq=False)
class SweepResult:
    """Observables on a parameter grid, flattened in C order over ``axes``."""

    axes: dict
    data: dict
    metadata: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.data["t"])

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(v) for v in self.axes.values())

    def grid(self, column: str) -> np.ndarray:
        """A column reshaped onto the axes."""
        return np.asarray(self.data[column]).reshape(self.shape)

    def records(self):
        for i in range(len(self)):
            yield {c: self.data[c][i] for c in COLUMNS}

    def _cells(self, i: int) -> list[str]:
        return [
            str(self.data[c][i]) if c == "regime" else format_float(self.data[c][i])
            for c in COLUMNS
        ]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("# metadata: " + json.dumps(self.metadata, sort_keys=True) + "\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(COLUMNS)
        for i in range(len(self)):
            writer.writerow(self._cells(i))
        return buf.getvalue()

    def to_json(self) -> str:
        records = []
        for i in range(len(self)):
            rec = {}
            for c, cell in zip(COLUMNS, self._cells(i)):
                if c == "regime" or cell in ("inf", "-inf", "nan"):
                    rec[c] = cell
                else:
                    rec[c] = float(cell)
            records.append(rec)
        doc = {"metadata": self.metadata, "columns": list(COLUMNS), "records": records}
        return json.dumps(doc, indent=1, sort_keys=False) + "\n"

    def write(self, path, fmt: str = "csv") -> None:
        text = self.to_csv() if fmt == "csv" else self.to_json()
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def read_metadata(path) -> dict:
    """Recover the configuration echoed into a CSV or JSON sweep file."""
    with open(path, encoding="utf-8") as fh:
        first = fh.readline()
        if first.startswith("# metadata: "):
            return json.loads(first[len("# metadata: ") :])
        fh.seek(0)
        return json.load(fh)["metadata"]


def axes_from_metadata(meta: Mapping) -> dict:
    """Axis specs from metadata, in sweep order (JSON keys may have been sorted)."""
    order = meta.get("axis_order", list(meta["axes"]))
    return {name: AxisSpec.coerce(meta["axes"][name]) for name in order}


def read_csv(path) -> SweepResult:
    """Load a CSV sweep file written by :meth:`SweepResult.to_csv`."""
    meta = read_metadata(path)
    with open(path, encoding="utf-8") as fh:
        rows = list(csv.reader(line for line in fh if not line.startswith("#")))
    header, body = rows[0], rows[1:]
    cols = {name: [r[k] for r in body] for k, name in enumerate(header)}
    data = {c: np.array(cols[c], dtype=float) for c in COLUMNS if c != "regime"}
    data["regime"] = np.array(cols["regime"], dtype=object)
    axes = {name: spec.grid(name) for name, spec in axes_from_metadata(meta).items()}
    return SweepResult(axes, data, meta)


def figure_preset(fig: int) -> tuple[CavityParams, dict]:
    """Fixed parameters and axes reproducing the published figure data."""
    if fig == 2:
        fixed = CavityParams(G=1.01, R=0.2, theta=0.0)
        axes = {"t": AxisSpec(0.0, 1.0, 101), "phi": AxisSpec(0.0, math.pi / 2, 101)}
    elif fig == 3:
        fixed = CavityParams(G=1.01, R=0.2, phi=math.pi / 8, theta=0.0)
        axes = {"t": AxisSpec(0.0, 1.0, 1001)}
    else:
        raise ParameterError(f"no preset for figure {fig}; available: 2, 3")
    return fixed, axes


def _validate_axis(fixed: CavityParams, name: str, grid: np.ndarray) -> None:
    for value in (grid.min(), grid.max()):
        replace(fixed, **{name: float(value)})


def classify(t, t_c, K, nonnormality, band: float) -> np.ndarray:
    near = (np.abs(t - t_c) <= band) & (nonnormality > NONNORMAL_TOL)
    regime = np.where(t < t_c, Regime.LOCKED.value, Regime.UNLOCKED.value).astype(object)
    regime[near | np.isinf(K)] = Regime.CRITICAL.value
    return regime


def sweep(
    fixed: CavityParams,
    axes: Mapping[str, object],
    critical_band: float = CRITICAL_BAND,
    jobs: int = 1,
    backend: str | None = None,
) -> SweepResult:
    """
    Evaluate photon numbers and the K factor on a grid.

    Parameters
    ----------
    fixed : CavityParams
        Values for every parameter that is not swept.
    axes : mapping of parameter name to grid
        Each grid is an :class:`AxisSpec`, a spec string ``"start:stop:num"``
        or a sequence of values.
    jobs : int
        Number of worker threads; output order does not depend on it.

    Points above the oscillation threshold carry ``inf`` photon numbers;
    points at the exceptional point carry ``K = inf`` and regime Critical.
    """
    specs = {}
    for name, spec in axes.items():
        if name not in PARAM_NAMES:
            raise ParameterError(f"unknown sweep axis {name!r}; choose from {PARAM_NAMES}")
        specs[name] = AxisSpec.coerce(spec)
    grids = {name: spec.grid(name) for name, spec in specs.items()}
    for name, g in grids.items():
        _validate_axis(fixed, name, g)

    mesh = np.meshgrid(*grids.values(), indexing="ij") if grids else []
    size = int(np.prod([len(g) for g in grids.values()])) if grids else 1
    cols = {name: np.full(size, getattr(fixed, name), dtype=float) for name in PARAM_NAMES}
    for name, m in zip(grids, mesh):
        cols[name] = m.ravel().astype(float)

    backend = backend or kernels.BACKEND
    args = [cols[k] for k in ("G", "R", "t", "phi", "theta")]
    bounds = [(i, min(i + CHUNK, size)) for i in range(0, size, CHUNK)]

    def run(bound):
        lo, hi = bound
        return kernels.evaluate_points(*(a[lo:hi] for a in args), backend=backend)

    if jobs > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(run, bounds))
    else:
        parts = [run(b) for b in bounds]
    n_a, n_b, K, nonnormal, status = (np.concatenate(p) for p in zip(*parts))

    s = np.abs(np.sin(2.0 * cols["phi"]))
    t_c = np.sqrt((1.0 - s) / (1.0 + s))
    data = dict(cols)
    data.update(
        n_a=n_a,
        n_b=n_b,
        N_total=n_a + n_b,
        K=K,
        regime=classify(cols["t"], t_c, K, nonnormal, critical_band),
        status=status,
    )
    metadata = {
        "program": "spdcavity",
        "version": __version__,
        "command": "sweep",
        "fixed": fixed.as_dict(),
        "axes": {name: spec.to_json() for name, spec in specs.items()},
        "axis_order": list(specs),
        "critical_band": critical_band,
        "backend": backend,
    }
    return SweepResult(grids, data, metadata)
