# phasefield_engine/utils.py - Output helpers shared by the engine
import json
import logging
import math
import os
from dataclasses import asdict, is_dataclass
from enum import Enum

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

CSV_FLOAT_FORMAT = "%.17g"


def safe_val(v):
    """
    Convert numpy/pandas values to plain Python types for JSON output.
    Non-finite floats become the strings 'inf', '-inf' and 'nan' so reports
    stay valid JSON.
    """
    if v is None:
        return None
    if isinstance(v, Enum):
        return v.value
    if isinstance(v, np.generic):
        v = v.item()
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return v


def to_jsonable(obj):
    """Recursively convert dataclasses, arrays and mappings into JSON-ready data."""
    if is_dataclass(obj) and not isinstance(obj, type):
        if hasattr(obj, "to_dict"):
            return to_jsonable(obj.to_dict())
        return to_jsonable(asdict(obj))
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    return safe_val(obj)


def ensure_dir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path


def write_csv(df: pd.DataFrame, path: str) -> str:
    """Locale-independent CSV: 17 significant digits, '.' decimals, LF endings."""
    ensure_dir(os.path.dirname(os.path.abspath(path)))
    df.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
    logger.info(f"📁 wrote {path} ({len(df)} rows)")
    return path


def write_json(data, path: str) -> str:
    ensure_dir(os.path.dirname(os.path.abspath(path)))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(to_jsonable(data), fh, indent=2, ensure_ascii=False)
        fh.write("\n")
    logger.info(f"📁 wrote {path}")
    return path


def chunk_ranges(n: int, size: int) -> list:
    """Contiguous ``(start, stop)`` index ranges of at most ``size`` items."""
    return [(start, min(start + size, n)) for start in range(0, n, size)]
