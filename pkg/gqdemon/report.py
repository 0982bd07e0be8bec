"""Serialization of result tables to CSV and JSON.

Outputs are deterministic: no timestamps, stable key order, values rounded
to a fixed number of significant digits.
"""

import json
from pathlib import Path
from typing import Any, Mapping, Optional, Sequence

import polars as pl
import typer

from . import __version__


BASIS_FAMILY = "product rank-one projective"
_ZERO_SNAP = 1e-12


def metadata(grid: Mapping[str, Any], **extra: Any) -> dict[str, Any]:
    """Self-describing header shared by every output."""
    return {"version": __version__, "basis_family": BASIS_FAMILY, "grid": dict(grid), **extra}


def round_value(value: Any, precision: int) -> Any:
    """Round floats to `precision` significant digits; other values pass through."""
    if isinstance(value, bool) or not isinstance(value, float):
        return value
    if abs(value) < _ZERO_SNAP:
        return 0.0
    return float(f"{value:.{precision}g}")


def _rounded(payload: Any, precision: int) -> Any:
    if isinstance(payload, Mapping):
        return {key: _rounded(value, precision) for key, value in payload.items()}
    if isinstance(payload, (list, tuple)):
        return [_rounded(value, precision) for value in payload]
    return round_value(payload, precision)


def _header_value(value: Any) -> str:
    if isinstance(value, (Mapping, list, tuple)):
        return json.dumps(value, sort_keys=True, separators=(",", ":"))
    if isinstance(value, bool):
        return str(value).lower()
    return str(value)


def render_csv(
    rows: Sequence[Mapping[str, Any]],
    columns: Sequence[str],
    meta: Mapping[str, Any],
    precision: int = 6,
) -> str:
    """`# key=value` metadata lines followed by the table."""
    header = "".join(
        f"# {key}={_header_value(_rounded(value, precision))}\n" for key, value in meta.items()
    )
    frame = pl.DataFrame(
        {column: [round_value(row.get(column), precision) for row in rows] for column in columns}
    )
    return header + frame.write_csv()


def render_json(payload: Mapping[str, Any], meta: Mapping[str, Any], precision: int = 6) -> str:
    body = {"metadata": dict(meta), **_rounded(payload, precision)}
    return json.dumps(body, indent=2) + "\n"


def write_output(text: str, out: Optional[Path]) -> None:
    """Write to `out`, or to stdout when no path is given."""
    if out is None:
        typer.echo(text, nl=False)
    else:
        out.write_text(text)
