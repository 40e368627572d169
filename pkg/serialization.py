"""
JSON helpers: matrices go out row-major as [re, im] pairs
"""

import json
import os
import logging
from typing import Any, List, Sequence

import numpy as np

logger = logging.getLogger(__name__)


def encode_matrix(matrix: np.ndarray) -> List[List[List[float]]]:
    """Row-major list of rows, each entry an [re, im] pair"""
    arr = np.atleast_2d(np.asarray(matrix, dtype=complex))
    return [[[float(z.real), float(z.imag)] for z in row] for row in arr]


def decode_matrix(rows: Sequence[Sequence[Sequence[float]]]) -> np.ndarray:
    arr = np.asarray(rows, dtype=float)
    if arr.ndim != 3 or arr.shape[-1] != 2:
        raise ValueError("expected a row-major array of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def encode_vector(vector: np.ndarray) -> List[List[float]]:
    return [[float(z.real), float(z.imag)] for z in np.asarray(vector, dtype=complex).ravel()]


def _default(obj: Any):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def dumps(payload: Any) -> str:
    return json.dumps(payload, indent=2, ensure_ascii=False, default=_default)


def write_json(path: str, payload: Any) -> None:
    """Write a report, creating the parent directory when needed"""
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write(dumps(payload))
        f.write("\n")
    logger.debug(f"wrote {path}")


def read_json(path: str) -> Any:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)
