"""
NC-Chern - Result Writer

JSON documents for single results and CSV tables for sweeps. Apart from the
generated_at timestamp, the payload depends only on the configuration and the
computed numbers.
"""

import json
import logging
import math
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, TextIO, Union

import pandas as pd

from src import __version__


logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
FLOAT_FORMAT = "%.10g"

CSV_COLUMNS: Dict[str, List[str]] = {
    "phase-diagram": ["index", "model", "m", "lambda", "value", "stderr", "realizations", "per_seed", "error"],
    "localization": ["lambda", "fermi_energy", "s", "beta", "C_s", "residual", "delocalized"],
    "sobolev": ["delta_h", "norm", "crossing"],
    "verify-identity": ["check", "n", "trial", "lhs", "rhs", "rel_error", "tolerance", "passed"],
}


def _plain(value: Any) -> Any:
    """JSON-safe copy: complex -> {re, im}, non-finite floats -> strings, numpy scalars -> Python."""
    if isinstance(value, Mapping):
        return {str(key): _plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(item) for item in value]
    if hasattr(value, "tolist"):
        return _plain(value.tolist())
    if isinstance(value, complex):
        return {"re": _plain(value.real), "im": _plain(value.imag)}
    if isinstance(value, float):
        if math.isnan(value) or math.isinf(value):
            return str(value)
        return float(f"{value:.12g}")
    return value


def build_document(command: str, config: Mapping[str, Any], result: Any) -> Dict[str, Any]:
    """Versioned JSON document around a result payload."""
    payload = result.to_dict() if hasattr(result, "to_dict") else result
    return {
        "schema_version": SCHEMA_VERSION,
        "tool_version": __version__,
        "generated_at": datetime.now(timezone.utc).isoformat(),
        "command": command,
        "config": _plain(dict(config)),
        "result": _plain(payload),
    }


def dumps_document(document: Mapping[str, Any]) -> str:
    return json.dumps(document, sort_keys=True, indent=2) + "\n"


def rows_to_frame(command: str, rows: Iterable[Mapping[str, Any]]) -> pd.DataFrame:
    """DataFrame with the documented column order for a tabular command."""
    columns = CSV_COLUMNS.get(command)
    frame = pd.DataFrame(list(rows))
    if columns is None:
        return frame
    return frame.reindex(columns=columns)


def write_json(
    command: str,
    config: Mapping[str, Any],
    result: Any,
    path: Optional[Union[str, Path]] = None,
    stream: Optional[TextIO] = None,
) -> str:
    """
    Serialise a result document to path (or stream when path is None).

    Returns:
        The serialised text
    """
    text = dumps_document(build_document(command, config, result))
    _emit(text, path, stream)
    return text


def write_csv(
    command: str,
    rows: Iterable[Mapping[str, Any]],
    path: Optional[Union[str, Path]] = None,
    stream: Optional[TextIO] = None,
) -> str:
    """
    Serialise table rows with the stable column order and %.10g floats.

    Returns:
        The serialised text
    """
    frame = rows_to_frame(command, rows)
    text = frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    _emit(text, path, stream)
    return text


def _emit(text: str, path: Optional[Union[str, Path]], stream: Optional[TextIO]) -> None:
    if path is None:
        if stream is not None:
            stream.write(text)
        return
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(text, encoding="utf-8")
    logger.info(f"[OK] Wrote {target} ({len(text)} bytes)")
