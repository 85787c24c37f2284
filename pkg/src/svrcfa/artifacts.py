"""CSV, SVG and manifest outputs for benchmark runs."""

from __future__ import annotations

import dataclasses
import json
import math
import os
import subprocess
from pathlib import Path
from xml.sax.saxutils import escape

from svrcfa.bench import RmseRecord
from svrcfa.complexity import CostReport
from svrcfa.config import ExperimentConfig

COMPLEXITY_COLUMNS = ["N", "music_mults", "svr_mults", "gain_db"]


def _fmt(value) -> str:
    if isinstance(value, float):
        return "nan" if math.isnan(value) else repr(value)
    return str(value)


def _ensure_dir(out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if not os.access(out, os.W_OK):
        raise PermissionError(f"output directory {out} is not writable")
    return out


def write_csv(path, header: list[str], rows: list[list]) -> None:
    lines = [",".join(header)] + [",".join(_fmt(v) for v in row) for row in rows]
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def records_csv(records: list[RmseRecord], path) -> None:
    cols = RmseRecord.columns()
    write_csv(path, cols, [[getattr(r, c) for c in cols] for r in records])


def line_chart_svg(
    panels: list[tuple[str, dict[str, list[tuple[float, float]]]]],
    x_label: str,
    width: int = 360,
    height: int = 260,
) -> str:
    """Side-by-side panels, one ``<polyline>`` per named series."""
    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"]
    pad = 40
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width * len(panels)}" height="{height}" '
        f'font-family="sans-serif" font-size="11">'
    ]
    for p, (title, series) in enumerate(panels):
        x0 = p * width
        pts = [(x, y) for s in series.values() for x, y in s if math.isfinite(y)]
        xs = [x for x, _ in pts] or [0.0, 1.0]
        ys = [y for _, y in pts] or [0.0, 1.0]
        xmin, xmax = min(xs), max(xs)
        ymin, ymax = 0.0, max(ys) * 1.05 or 1.0
        xspan = (xmax - xmin) or 1.0

        def sx(x):
            return x0 + pad + (x - xmin) / xspan * (width - 2 * pad)

        def sy(y):
            return height - pad - (y - ymin) / (ymax - ymin) * (height - 2 * pad)

        parts.append(
            f'<rect x="{x0 + pad}" y="{pad}" width="{width - 2 * pad}" height="{height - 2 * pad}" '
            f'fill="none" stroke="#888"/>'
        )
        parts.append(f'<text x="{x0 + width / 2}" y="{pad - 12}" text-anchor="middle">{escape(title)}</text>')
        parts.append(f'<text x="{x0 + width / 2}" y="{height - 8}" text-anchor="middle">{escape(x_label)}</text>')
        parts.append(f'<text x="{x0 + pad - 4}" y="{sy(ymax):.1f}" text-anchor="end">{ymax:.3g}</text>')
        parts.append(f'<text x="{x0 + pad - 4}" y="{sy(ymin):.1f}" text-anchor="end">0</text>')
        for k, (name, s) in enumerate(series.items()):
            color = colors[k % len(colors)]
            coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in s if math.isfinite(y))
            parts.append(f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"/>')
            parts.append(f'<text x="{x0 + width - pad - 4}" y="{pad + 14 + 13 * k}" text-anchor="end" fill="{color}">{escape(name)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def records_svg(records: list[RmseRecord], x_label: str) -> str:
    def series(attr):
        return [(r.axis_value, getattr(r, attr)) for r in records]

    panels = [
        ("RMSE phi (deg)", {"SVR-CFA": series("rmse_phi_svr"), "MUSIC": series("rmse_phi_music")}),
        ("RMSE theta (deg)", {"SVR-CFA": series("rmse_theta_svr"), "MUSIC": series("rmse_theta_music")}),
    ]
    return line_chart_svg(panels, x_label)


def git_describe() -> str:
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            capture_output=True, text=True, timeout=10, cwd=Path(__file__).parent,
        )
    except (OSError, subprocess.SubprocessError):
        return "unknown"
    return out.stdout.strip() or "unknown"


def write_manifest(path, cfg: ExperimentConfig, sweep: str, extra: dict | None = None) -> None:
    manifest = {
        "sweep": sweep,
        "config": dataclasses.asdict(cfg),
        "seed": cfg.seed,
        "rng_stream": "default_rng([seed, sweep_id, point_index, azimuth_index, trial])",
        "git_describe": git_describe(),
    }
    manifest.update(extra or {})
    Path(path).write_text(json.dumps(manifest, indent=2, default=str) + "\n")


def emit_artifacts(records: list[RmseRecord], out_dir, sweep: str, x_label: str, cfg: ExperimentConfig) -> list[Path]:
    """Write ``<sweep>.csv``, ``<sweep>.svg`` (skipped when empty) and ``<sweep>.manifest.json``."""
    out = _ensure_dir(out_dir)
    written = [out / f"{sweep}.csv"]
    records_csv(records, written[0])
    if records:
        written.append(out / f"{sweep}.svg")
        written[-1].write_text(records_svg(records, x_label))
    written.append(out / f"{sweep}.manifest.json")
    write_manifest(written[-1], cfg, sweep)
    return written


def emit_complexity(reports: list[CostReport], out_dir) -> list[Path]:
    out = _ensure_dir(out_dir)
    csv_path = out / "complexity.csv"
    write_csv(csv_path, COMPLEXITY_COLUMNS, [[r.n, r.music_mults, r.svr_cfa_mults, round(r.gain_db, 6)] for r in reports])
    written = [csv_path]
    if reports:
        svg = line_chart_svg([("Complexity gain (dB)", {"MUSIC / SVR-CFA": [(r.n, r.gain_db) for r in reports]})], "N")
        written.append(out / "complexity.svg")
        written[-1].write_text(svg)
    return written
