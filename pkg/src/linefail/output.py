"""CSV and JSON persistence for run and ensemble results."""

from __future__ import annotations

import json
import platform
import re
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

CSV_FMT = "%.8e"  # 9 significant digits, always a '.' decimal point

TIMESERIES_COLUMNS = [
    ("t", "yr"),
    ("max_phi", "-"),
    ("max_fatigue", "-"),
    ("max_theta", "K"),
    ("delta_V", "V"),
]
LOAD_COLUMNS = [("t", "yr"), ("theta_air", "K"), ("wind", "ft/s"), ("current", "A"), ("tension", "N")]
FIELD_COLUMNS = [
    ("x", "m"),
    ("u", "m"),
    ("phi", "-"),
    ("fatigue", "-"),
    ("theta", "K"),
    ("voltage", "V"),
    ("history", "J/m3"),
]


class BundleError(ValueError):
    """A results directory is missing files or does not match another bundle."""


def header(columns: Sequence[Tuple[str, str]]) -> str:
    return ",".join(f"{name} [{unit}]" for name, unit in columns)


def write_csv(path, columns: Sequence[Tuple[str, str]], data) -> Path:
    path = Path(path)
    data = np.column_stack([np.asarray(c, dtype=float) for c in data])
    if data.shape[1] != len(columns):
        raise ValueError(f"{len(columns)} column names for {data.shape[1]} columns")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        np.savetxt(fh, data, fmt=CSV_FMT, delimiter=",", header=header(columns), comments="")
    return path


def read_csv(path) -> Tuple[List[str], np.ndarray]:
    """Column names (units stripped) and a 2-D array of values."""
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        names = [re.sub(r"\s*\[.*\]$", "", c.strip()) for c in fh.readline().strip().split(",")]
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return names, data


def year_label(step: int, dt: float) -> str:
    return f"{step * dt:.6g}"


def write_run(result, out_dir) -> List[str]:
    out = Path(out_dir)
    files = [
        write_csv(out / "timeseries.csv", TIMESERIES_COLUMNS, list(result.series().values())),
        write_csv(
            out / "loads.csv",
            LOAD_COLUMNS,
            [result.time, result.theta_air, result.wind, result.current, result.tension],
        ),
    ]
    for step, s in sorted(result.snapshots.items()):
        cols = [result.node_x, s.u, s.phi, s.fatigue, s.theta, s.voltage, s.history]
        files.append(write_csv(out / f"fields_{year_label(step, result.dt)}.csv", FIELD_COLUMNS, cols))
    return [f.name for f in files]


def write_ensemble(ens, node_x, out_dir) -> List[str]:
    out = Path(out_dir)
    stats = ens.stats or ens.compute_statistics()
    files = [
        write_csv(
            out / "stats.csv",
            [("t", "yr"), ("E_theta_max", "K"), ("std_theta_max", "K")],
            [stats["t"], stats["E_theta_max"], stats["std_theta_max"]],
        ),
        write_csv(out / "pf.csv", [("t", "yr"), ("pf", "-")], [stats["t_full"], stats["pf"]]),
    ]
    if "sobol" in stats:
        cols = [("t", "yr")] + [(f"S_{n}", "-") for n in ens.names]
        files.append(write_csv(out / "sobol.csv", cols, [stats["t"], *stats["sobol"]]))
    for step, (mean, std) in ens.field_stats().items():
        files.append(
            write_csv(
                out / f"fields_{year_label(step, ens.dt)}.csv",
                [("x", "m"), ("E_theta", "K"), ("std_theta", "K")],
                [node_x, mean, std],
            )
        )
    fail = [np.nan if s is None else s * ens.dt for s in ens.failure_steps()]
    params = [[r.params[n] for r in ens.realizations] for n in ens.names]
    files.append(
        write_csv(
            out / "realizations.csv",
            [("index", "-")] + [(n, "-") for n in ens.names] + [("failure_time", "yr")],
            [np.arange(ens.size), *params, fail],
        )
    )
    return [f.name for f in files]


def read_field_stats(bundle_dir) -> Dict[str, Tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """{year label: (x, E_theta, std_theta)} from an ensemble bundle."""
    out = {}
    for path in sorted(Path(bundle_dir).glob("fields_*.csv")):
        names, data = read_csv(path)
        if names != ["x", "E_theta", "std_theta"]:
            raise BundleError(f"{path} is not an ensemble field file (columns {names})")
        out[path.stem[len("fields_"):]] = (data[:, 0], data[:, 1], data[:, 2])
    return out


def compare_bundles(bundle_dir, reference_dir, relative_error) -> List[Tuple[float, float, float]]:
    """Rows (year, eps_E, eps_std) for every snapshot year the two bundles share."""
    ours, ref = read_field_stats(bundle_dir), read_field_stats(reference_dir)
    if not ref:
        raise BundleError(f"no ensemble field files in reference bundle {reference_dir}")
    common = sorted(set(ours) & set(ref), key=float)
    if not common:
        raise BundleError(f"no common snapshot years: {sorted(ours)} vs {sorted(ref)}")
    rows = []
    for year in common:
        x, E, s = ours[year]
        xr, Er, sr = ref[year]
        if x.shape != xr.shape or not np.allclose(x, xr, rtol=0, atol=1e-9 * max(1.0, abs(xr[-1]))):
            raise BundleError(f"incompatible grids at year {year}: {x.size} vs {xr.size} nodes")
        eps_s = relative_error(s, sr) if np.linalg.norm(sr) > 0 else float(np.linalg.norm(s))
        rows.append((float(year), relative_error(E, Er), eps_s))
    return rows


def versions() -> Dict[str, str]:
    import scipy
    import yaml

    from . import __version__

    return {
        "linefail": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "pyyaml": yaml.__version__,
    }


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    return obj


def write_manifest(out_dir, manifest: dict) -> Path:
    path = Path(out_dir) / "manifest.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_clean(manifest), fh, indent=2)
        fh.write("\n")
    return path


def read_manifest(bundle_dir) -> Optional[dict]:
    path = Path(bundle_dir) / "manifest.json"
    if not path.exists():
        return None
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
