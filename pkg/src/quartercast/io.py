"""CSV ingestion and report serialization.

All files are UTF-8 CSV with fixed lowercase headers and '.' decimals;
floats are written with repr so a load-write-load cycle is the identity.
Reports serialize to JSON (full detail, versioned) or CSV (matrix form
with two-decimal percentages); undefined comparison cells render as the
literal ``n/a`` in CSV and ``null`` in JSON.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

from .errors import ContiguityError, DuplicateKeyError, SchemaMismatchError, ValidationError
from .fiscal import FiscalQuarter, parse_quarter, quarter_add
from .pipeline import ApeDetail, ComparisonTable, EvaluationReport, HorizonCell
from .series import TOTAL_ID, Dataset, QuarterlySeries

REPORT_SCHEMA_VERSION = 1

REVENUE_HEADER = ["geo", "fiscal_year", "fiscal_quarter", "revenue"]
INDICATOR_HEADER = ["geo", "indicator", "fiscal_year", "fiscal_quarter", "value"]
EXPERT_HEADER = ["geo", "fiscal_year", "fiscal_quarter", "expert_forecast"]


def _read_rows(path, expected_header):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValidationError(f"{path}: empty file") from None
        if header != expected_header:
            raise SchemaMismatchError(
                f"{path}: expected header {','.join(expected_header)}, got {','.join(header)}"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(expected_header):
                raise ValidationError(f"{path}:{lineno}: expected {len(expected_header)} fields")
            yield lineno, row


def _parse_fq(path, lineno, year_text, quarter_text) -> FiscalQuarter:
    try:
        return FiscalQuarter(int(year_text), int(quarter_text))
    except (ValueError, ValidationError) as exc:
        raise ValidationError(f"{path}:{lineno}: bad fiscal quarter: {exc}") from None


def _parse_value(path, lineno, text, require_positive=True) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ValidationError(f"{path}:{lineno}: not a number: {text!r}") from None
    if require_positive and value <= 0.0:
        raise ValidationError(f"{path}:{lineno}: value must be positive, got {value}")
    return value


def _series_from_map(series_id: str, label: str, by_quarter: dict) -> QuarterlySeries:
    quarters = sorted(by_quarter)
    for prev_q, cur_q in zip(quarters, quarters[1:]):
        if cur_q.index != prev_q.index + 1:
            missing = quarter_add(prev_q, 1)
            raise ContiguityError(f"{label} {missing}: missing quarter")
    return QuarterlySeries.from_points(series_id, [(q, by_quarter[q]) for q in quarters])


def load_revenue_csv(path) -> Dataset:
    """Dataset (revenue part) from geo,fiscal_year,fiscal_quarter,revenue rows."""
    data: dict[str, dict[FiscalQuarter, float]] = {}
    for lineno, row in _read_rows(path, REVENUE_HEADER):
        geo = row[0].strip()
        fq = _parse_fq(path, lineno, row[1], row[2])
        value = _parse_value(path, lineno, row[3])
        per_geo = data.setdefault(geo, {})
        if fq in per_geo:
            raise DuplicateKeyError(f"{path}:{lineno}: duplicate entry for {geo} {fq}")
        per_geo[fq] = value
    if not data:
        raise ValidationError(f"{path}: no data rows")
    total = None
    revenue = {}
    for geo in sorted(data):
        series = _series_from_map(geo, geo, data[geo])
        if geo == TOTAL_ID:
            total = series
        else:
            revenue[geo] = series
    return Dataset.build(revenue, total=total)


def load_indicator_csv(path) -> dict[tuple[str, str], QuarterlySeries]:
    """Indicator map from geo,indicator,fiscal_year,fiscal_quarter,value rows."""
    data: dict[tuple[str, str], dict[FiscalQuarter, float]] = {}
    for lineno, row in _read_rows(path, INDICATOR_HEADER):
        key = (row[0].strip(), row[1].strip())
        fq = _parse_fq(path, lineno, row[2], row[3])
        value = _parse_value(path, lineno, row[4])
        per_key = data.setdefault(key, {})
        if fq in per_key:
            raise DuplicateKeyError(f"{path}:{lineno}: duplicate entry for {key[0]}/{key[1]} {fq}")
        per_key[fq] = value
    return {
        (geo, ind): _series_from_map(geo, f"{geo}/{ind}", values)
        for (geo, ind), values in sorted(data.items())
    }


def load_expert_forecasts_csv(path) -> dict[tuple[str, FiscalQuarter], float]:
    """Sparse expert forecasts keyed by (geo, quarter)."""
    out: dict[tuple[str, FiscalQuarter], float] = {}
    for lineno, row in _read_rows(path, EXPERT_HEADER):
        key = (row[0].strip(), _parse_fq(path, lineno, row[1], row[2]))
        if key in out:
            raise DuplicateKeyError(f"{path}:{lineno}: duplicate expert forecast for {key[0]} {key[1]}")
        out[key] = _parse_value(path, lineno, row[3], require_positive=False)
    return out


def with_indicators(dataset: Dataset, indicators) -> Dataset:
    return Dataset.build(dataset.revenue, total=dataset.total, indicators=indicators)


def write_revenue_csv(dataset: Dataset, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(REVENUE_HEADER)
        for geo in dataset.geos() + [TOTAL_ID]:
            for fq, value in dataset.series_for(geo).points():
                writer.writerow([geo, fq.year, fq.quarter, repr(value)])


def write_indicator_csv(indicators, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(INDICATOR_HEADER)
        for (geo, ind), series in sorted(indicators.items()):
            for fq, value in series.points():
                writer.writerow([geo, ind, fq.year, fq.quarter, repr(value)])


def report_to_dict(report: EvaluationReport) -> dict:
    return {
        "schema_version": REPORT_SCHEMA_VERSION,
        "kind": "evaluation_report",
        "model": report.model,
        "geos": list(report.geos),
        "horizons": list(report.horizons),
        "metadata": report.metadata,
        "results": [
            {
                "geo": geo,
                "horizon": h,
                "mape": cell.mape,
                "details": [
                    {
                        "quarter": str(d.target),
                        "actual": d.actual,
                        "forecast": d.forecast,
                        "ape": d.ape,
                    }
                    for d in cell.details
                ],
            }
            for (geo, h), cell in sorted(report.cells.items())
        ],
    }


def report_from_dict(doc: dict) -> EvaluationReport:
    if doc.get("kind") != "evaluation_report" or doc.get("schema_version") != REPORT_SCHEMA_VERSION:
        raise SchemaMismatchError("not a recognized evaluation report document")
    cells = {}
    for entry in doc["results"]:
        details = tuple(
            ApeDetail(parse_quarter(d["quarter"]), d["actual"], d["forecast"], d["ape"])
            for d in entry["details"]
        )
        cells[(entry["geo"], entry["horizon"])] = HorizonCell(mape=entry["mape"], details=details)
    return EvaluationReport(
        model=doc["model"],
        geos=tuple(doc["geos"]),
        horizons=tuple(doc["horizons"]),
        cells=cells,
        metadata=doc["metadata"],
    )


def table_to_dict(table: ComparisonTable) -> dict:
    return {
        "schema_version": REPORT_SCHEMA_VERSION,
        "kind": "comparison_table",
        "mode": table.mode,
        "row_labels": list(table.row_labels),
        "col_labels": list(table.col_labels),
        "cells": [list(row) for row in table.cells],
        "metadata": table.metadata,
    }


def table_from_dict(doc: dict) -> ComparisonTable:
    if doc.get("kind") != "comparison_table" or doc.get("schema_version") != REPORT_SCHEMA_VERSION:
        raise SchemaMismatchError("not a recognized comparison table document")
    return ComparisonTable(
        mode=doc["mode"],
        row_labels=tuple(doc["row_labels"]),
        col_labels=tuple(doc["col_labels"]),
        cells=tuple(tuple(row) for row in doc["cells"]),
        metadata=doc["metadata"],
    )


def _dump_json(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _report_csv(report: EvaluationReport) -> str:
    lines = ["geo," + ",".join(f"horizon_{h}" for h in report.horizons)]
    for geo in report.geos:
        cells = []
        for h in report.horizons:
            cell = report.cells.get((geo, h))
            cells.append("n/a" if cell is None else f"{cell.mape:.2f}")
        lines.append(geo + "," + ",".join(cells))
    return "\n".join(lines) + "\n"


def _table_csv(table: ComparisonTable) -> str:
    lines = ["row," + ",".join(table.col_labels)]
    for label, row in zip(table.row_labels, table.cells):
        cells = ["n/a" if v is None else f"{v:.2f}" for v in row]
        lines.append(label + "," + ",".join(cells))
    return "\n".join(lines) + "\n"


def write_report(obj, fmt: str, path) -> None:
    """Write a report or comparison table as json or csv."""
    if fmt not in ("json", "csv"):
        raise ValidationError(f"output format must be 'json' or 'csv', got {fmt!r}")
    if isinstance(obj, EvaluationReport):
        text = _dump_json(report_to_dict(obj)) if fmt == "json" else _report_csv(obj)
    elif isinstance(obj, ComparisonTable):
        text = _dump_json(table_to_dict(obj)) if fmt == "json" else _table_csv(obj)
    else:
        raise ValidationError(f"cannot serialize {type(obj).__name__}")
    Path(path).write_text(text, encoding="utf-8")


def read_report(path) -> EvaluationReport:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return report_from_dict(doc)


def read_table(path) -> ComparisonTable:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return table_from_dict(doc)
