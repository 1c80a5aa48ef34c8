"""Utility functions for wickcalc."""

import csv
import json
import math
import os
import sys
import tempfile
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any

import numpy as np
from loguru import logger
from pydantic import BaseModel

from .errors import ErrorCode, WickCalcError

REPORT_DIGITS = 17
TABLE_DIGITS = 10


def setup_logging(level: str = "INFO", log_file: Path | None = None) -> None:
    """Setup logging configuration."""

    logger.remove()

    logger.add(
        sys.stderr,
        level=level,
        format="<green>{time:YYYY-MM-DD HH:mm:ss}</green> | "
        "<level>{level: <8}</level> | "
        "<cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> | "
        "<level>{message}</level>",
        colorize=True,
    )

    if log_file is not None:
        ensure_directory(log_file.parent)
        logger.add(
            log_file,
            level="DEBUG",
            format="{time:YYYY-MM-DD HH:mm:ss} | {level: <8} | {name}:{function}:{line} | {message}",
            rotation="10 MB",
            retention="10 days",
        )


def ensure_directory(path: Path) -> Path:
    """Create a directory (and parents) if it does not exist."""
    path.mkdir(parents=True, exist_ok=True)
    return path


def atomic_write_text(path: Path, text: str) -> None:
    """Write text to ``path`` through a temporary file and rename."""
    ensure_directory(path.parent)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        Path(tmp_name).unlink(missing_ok=True)
        raise


def format_float(value: float, digits: int = REPORT_DIGITS) -> str:
    """Format a float with a fixed number of significant digits."""
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return format(value, f".{digits}g")


def json_safe(value: Any) -> Any:
    """Convert numpy scalars, complex numbers and non-finite floats into JSON values."""
    if isinstance(value, BaseModel):
        return json_safe(value.model_dump())
    if isinstance(value, dict):
        return {str(key): json_safe(item) for key, item in value.items()}
    if isinstance(value, list | tuple):
        return [json_safe(item) for item in value]
    if isinstance(value, np.ndarray):
        return json_safe(value.tolist())
    if isinstance(value, complex | np.complexfloating):
        return {"re": json_safe(float(value.real)), "im": json_safe(float(value.imag))}
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, float | np.floating):
        number = float(value)
        if not math.isfinite(number):
            return format_float(number)
        return float(format_float(number))
    return value


def dumps_report(payload: Any) -> str:
    """Deterministic JSON text for reports."""
    return json.dumps(json_safe(payload), indent=2, sort_keys=False) + "\n"


def write_csv_table(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    """Write a CSV table, formatting floats to ``TABLE_DIGITS`` significant digits."""

    def cell(item: Any) -> str:
        if isinstance(item, float | np.floating):
            return format_float(float(item), TABLE_DIGITS)
        if isinstance(item, complex | np.complexfloating):
            return (
                f"{format_float(float(item.real), TABLE_DIGITS)}"
                f"{'+' if item.imag >= 0 else '-'}{format_float(abs(float(item.imag)), TABLE_DIGITS)}j"
            )
        return str(item)

    ensure_directory(path.parent)
    with tempfile.NamedTemporaryFile(
        "w", dir=path.parent, delete=False, newline="", encoding="utf-8", suffix=".tmp"
    ) as handle:
        writer = csv.writer(handle)
        writer.writerow(list(header))
        for row in rows:
            writer.writerow([cell(item) for item in row])
        tmp_name = handle.name
    os.replace(tmp_name, path)


class ExponentFit(BaseModel):
    """Least-squares fit of ``ln y = c0 + c1 * ln(h) + slope / h``."""

    slope: float
    log_prefactor: float
    hbar_power: float
    residual: float


def fit_exponential_rate(
    hbars: Sequence[float], values: Sequence[float], with_power: bool = True
) -> ExponentFit:
    """Fit the exponential rate of an exponentially small quantity in ``1/hbar``."""
    h = np.asarray(hbars, dtype=float)
    y = np.asarray(values, dtype=float)
    if h.shape != y.shape or h.size < (3 if with_power else 2):
        raise WickCalcError(ErrorCode.FIT_UNSTABLE, "not enough points for the fit")
    if not np.all(np.isfinite(y)) or np.any(y <= 0):
        raise WickCalcError(
            ErrorCode.FIT_UNSTABLE, "fit values must be positive and finite", values=y.tolist()
        )
    columns = [np.ones_like(h), 1.0 / h]
    if with_power:
        columns.insert(1, np.log(h))
    design = np.column_stack(columns)
    coeffs, _, rank, _ = np.linalg.lstsq(design, np.log(y), rcond=None)
    if rank < design.shape[1]:
        raise WickCalcError(ErrorCode.FIT_UNSTABLE, "degenerate hbar sequence")
    residual = float(np.max(np.abs(design @ coeffs - np.log(y))))
    return ExponentFit(
        slope=float(coeffs[-1]),
        log_prefactor=float(coeffs[0]),
        hbar_power=float(coeffs[1]) if with_power else 0.0,
        residual=residual,
    )


def fit_power_law(hbars: Sequence[float], values: Sequence[float]) -> tuple[float, float]:
    """Fit ``ln y = c + p ln h``; returns ``(p, max residual)``."""
    h = np.asarray(hbars, dtype=float)
    y = np.asarray(values, dtype=float)
    if h.size < 2 or not np.all(np.isfinite(y)) or np.any(y <= 0):
        raise WickCalcError(
            ErrorCode.FIT_UNSTABLE, "power-law fit needs positive values", values=y.tolist()
        )
    design = np.column_stack([np.ones_like(h), np.log(h)])
    coeffs, _, _, _ = np.linalg.lstsq(design, np.log(y), rcond=None)
    residual = float(np.max(np.abs(design @ coeffs - np.log(y))))
    return float(coeffs[1]), residual
