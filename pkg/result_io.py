"""
Result Files Module
Writes the toolkit's data products: Result JSON, landscape CSV, Grover trace CSV and fit JSON,
QUBO JSON with its encoding sidecar, and solve reports.

Files are written to a temp name next to the target and moved into place, so a reader never sees
a half-written file. Floats in CSV files carry 17 significant digits.
"""

import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, Union

import numpy as np
import pandas as pd

from grover import ScalingFit, scaling_frame
from qaoa import LandscapeGrid, QaoaResult
from qubo import Qubo, SpanningTreeEncoding, TreeDecoding

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"

PathLike = Union[str, Path]


def _serialize(value: Any) -> Any:
    """Convert numpy scalars/arrays and tuples (recursively) into JSON-compatible values"""
    if isinstance(value, dict):
        return {str(k): _serialize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_serialize(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_serialize(v) for v in value.tolist()]
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def _atomic_write(path: PathLike, text: str):
    path = Path(path)
    if path.parent and not path.parent.exists():
        os.makedirs(path.parent, exist_ok=True)
    temp_path = path.with_name(path.name + ".tmp")
    with open(temp_path, "w", encoding="utf-8", newline="") as f:
        f.write(text)
    os.replace(temp_path, path)


def write_json(data: Dict, path: PathLike):
    _atomic_write(path, json.dumps(_serialize(data), indent=2) + "\n")
    logger.info(f"Wrote {path}")


def write_csv(frame: pd.DataFrame, path: PathLike):
    _atomic_write(path, frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n"))
    logger.info(f"Wrote {len(frame)} rows to {path}")


def landscape_frame(grid: LandscapeGrid) -> pd.DataFrame:
    """One row per cell in row-major order: first coordinate outer, second inner"""
    xs, ys = np.meshgrid(grid.xs, grid.ys, indexing="ij")
    return pd.DataFrame({
        grid.labels[0]: xs.ravel(),
        grid.labels[1]: ys.ravel(),
        "expectation": grid.values.ravel(),
    })


def write_result(result: QaoaResult, path: PathLike):
    write_json(result.to_dict(), path)


def write_landscape(grid: LandscapeGrid, path: PathLike):
    write_csv(landscape_frame(grid), path)


def write_grover(fit: ScalingFit, csv_path: PathLike, fit_path: PathLike):
    write_csv(scaling_frame(fit.runs), csv_path)
    write_json(fit.to_dict(), fit_path)


def encoding_path_for(qubo_path: PathLike) -> Path:
    """Default sidecar location: q.json -> q.encoding.json"""
    qubo_path = Path(qubo_path)
    return qubo_path.with_name(qubo_path.stem + ".encoding.json")


def write_qubo(q: Qubo, enc: SpanningTreeEncoding, path: PathLike, encoding_path: PathLike = None):
    write_json(q.to_dict(), path)
    write_json(enc.to_dict(), encoding_path or encoding_path_for(path))


def solve_report(energy: float, bitstring: str, decoding: TreeDecoding) -> Dict:
    return {
        "energy": energy,
        "bitstring": bitstring,
        "decoded_edges": [[u, v] for u, v in decoding.edges],
        "feasible": decoding.feasible,
        "violations": list(decoding.violations),
    }
