"""CSV and JSON report writers.

CSV layout: alpha to 6 decimals, IM and add-ons in whole currency units,
CVA to 6 decimals. The JSON mirror holds the same numbers at full
precision; run timings go to a separate file so report bytes depend only
on (config, seed).
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Iterable

from .alpha import AlphaSolution
from .runner import RunReport

CVA_FILE = "cva_schemes.csv"
IM_FILE = "im_per_rating.csv"
ALPHA_FILE = "alpha_per_rating.csv"
JSON_FILE = "report.json"
TIMINGS_FILE = "timings.json"

ALPHA_DECIMALS = 6
CVA_DECIMALS = 6
FAILED = "failed"


def _fmt(x: float, decimals: int) -> str:
    s = f"{x:.{decimals}f}"
    # avoid "-0" / "-0.000000" cells
    return s[1:] if s.startswith("-") and float(s) == 0.0 else s


def _csv_text(header: list[str], rows: Iterable[list[str]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def cva_table(report: RunReport) -> str:
    header = ["maturity", "rating", "uncollateralized", "vm_only", "vm_im"]
    rows = []
    for t in report.trades:
        for r in report.ratings:
            c = t.cva[r]
            rows.append([t.label, r, _fmt(c.uncollateralized, CVA_DECIMALS),
                         _fmt(c.vm_only, CVA_DECIMALS), _fmt(c.vm_im, CVA_DECIMALS)])
    return _csv_text(header, rows)


def im_table(report: RunReport) -> str:
    header = ["maturity", "IM", *report.ratings]
    rows = []
    for t in report.trades:
        row = [t.label, _fmt(t.im_today, 0)]
        for r in report.ratings:
            add_on = t.add_on(r)
            row.append(FAILED if add_on is None else _fmt(add_on, 0))
        rows.append(row)
    return _csv_text(header, rows)


def alpha_table(report: RunReport) -> str:
    header = ["maturity", *report.ratings]
    rows = []
    for t in report.trades:
        row = [t.label]
        for r in report.ratings:
            cell = t.alpha[r]
            row.append(_fmt(cell.alpha, ALPHA_DECIMALS) if isinstance(cell, AlphaSolution) else FAILED)
        rows.append(row)
    return _csv_text(header, rows)


def report_dict(report: RunReport) -> dict:
    trades = []
    for t in report.trades:
        cells = {}
        for r in report.ratings:
            cell = t.alpha[r]
            if isinstance(cell, AlphaSolution):
                cells[r] = {
                    "status": "ok",
                    "alpha": cell.alpha,
                    "add_on": t.add_on(r),
                    "floored": cell.floored,
                    "iterations": cell.iterations,
                    "residual": cell.residual,
                    "tolerance": cell.tolerance,
                    "cva_reference": cell.cva_reference,
                    "cva_at_alpha": cell.cva_at_alpha,
                }
            else:
                cells[r] = {"status": FAILED, "error": cell.error,
                            "bracket": list(cell.bracket) if cell.bracket else None}
        trades.append({
            "label": t.label,
            "type": t.type,
            "maturity": t.maturity,
            "notional": t.notional,
            "im_today": t.im_today,
            "cva": {r: {"uncollateralized": c.uncollateralized, "vm_only": c.vm_only, "vm_im": c.vm_im}
                    for r, c in t.cva.items()},
            "alpha": cells,
        })
    return {
        "metadata": report.metadata,
        "ratings": report.ratings,
        "reference_rating": report.reference_rating,
        "trades": trades,
    }


def _write(path: Path, text: str) -> Path:
    try:
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write report {path}: {exc.strerror or exc}") from None
    return path


def write_reports(report: RunReport, directory: str | Path, formats: Iterable[str] = ("csv", "json"),
                  *, timings: bool = True) -> list[Path]:
    """Write the report files into ``directory``; returns the paths written."""
    directory = Path(directory)
    try:
        directory.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {directory}: {exc.strerror or exc}") from None
    formats = set(formats)
    out = []
    if "csv" in formats:
        out.append(_write(directory / CVA_FILE, cva_table(report)))
        out.append(_write(directory / IM_FILE, im_table(report)))
        out.append(_write(directory / ALPHA_FILE, alpha_table(report)))
    if "json" in formats:
        out.append(_write(directory / JSON_FILE, json.dumps(report_dict(report), indent=2) + "\n"))
    if timings:
        out.append(_write(directory / TIMINGS_FILE, json.dumps(report.timings, indent=2) + "\n"))
    return out


__all__ = ["ALPHA_FILE", "CVA_FILE", "IM_FILE", "JSON_FILE", "TIMINGS_FILE",
           "alpha_table", "cva_table", "im_table", "report_dict", "write_reports"]
