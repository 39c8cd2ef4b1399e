"""Simulation reports: stable JSON and CSV encodings of run stats, sweep
files with one row per seed, and rendered summary figures next to the
delimited output.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable

from .errors import McmsError
from .sim import SimStats, TimelineRow

CSV_HEADER = "seed,attempts,successes,failures,rejections,unique_devices,mean_in_range"


class ReportFormatError(McmsError):
    code = "ReportFormat"


def _stats_dict(stats: SimStats) -> dict:
    doc = {
        "seed": stats.seed,
        "attempts": stats.attempts,
        "successes": stats.successes,
        "failures": stats.failures,
        "rejections": stats.rejections,
        "unique_devices_seen": stats.unique_devices_seen,
        "mean_concurrent_in_range": stats.mean_concurrent_in_range,
        "timeline": None,
    }
    if stats.timeline is not None:
        doc["timeline"] = [
            {"hour": row.hour, "attempts": row.attempts, "successes": row.successes,
             "failures": row.failures, "rejections": row.rejections}
            for row in stats.timeline
        ]
    return doc


def _csv_row(stats: SimStats) -> str:
    return (f"{stats.seed},{stats.attempts},{stats.successes},{stats.failures},"
            f"{stats.rejections},{stats.unique_devices_seen},"
            f"{stats.mean_concurrent_in_range!r}")


def emit_report(stats: SimStats, format: str = "json") -> bytes:
    """Serialize one run's stats; field order is fixed so equal stats give
    identical bytes."""
    if format == "json":
        return (json.dumps(_stats_dict(stats), ensure_ascii=False, indent=2) + "\n").encode("utf-8")
    if format == "csv":
        return (CSV_HEADER + "\n" + _csv_row(stats) + "\n").encode("utf-8")
    raise ReportFormatError(format)


def parse_report(data: bytes, format: str = "json") -> SimStats:
    """Inverse of emit_report for both formats."""
    text = data.decode("utf-8")
    if format == "json":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as e:
            raise ReportFormatError(str(e)) from None
        timeline = None
        if doc.get("timeline") is not None:
            timeline = tuple(
                TimelineRow(row["hour"], row["attempts"], row["successes"],
                            row["failures"], row["rejections"])
                for row in doc["timeline"]
            )
        return SimStats(
            seed=doc["seed"],
            attempts=doc["attempts"],
            successes=doc["successes"],
            failures=doc["failures"],
            rejections=doc["rejections"],
            unique_devices_seen=doc["unique_devices_seen"],
            mean_concurrent_in_range=doc["mean_concurrent_in_range"],
            timeline=timeline,
        )
    if format == "csv":
        lines = [ln for ln in text.splitlines() if ln]
        if len(lines) != 2 or lines[0] != CSV_HEADER:
            raise ReportFormatError("expected header plus one row")
        return _stats_from_csv_row(lines[1])
    raise ReportFormatError(format)


def _stats_from_csv_row(row: str) -> SimStats:
    cells = row.split(",")
    if len(cells) != 7:
        raise ReportFormatError(f"expected 7 columns, got {len(cells)}")
    return SimStats(
        seed=int(cells[0]),
        attempts=int(cells[1]),
        successes=int(cells[2]),
        failures=int(cells[3]),
        rejections=int(cells[4]),
        unique_devices_seen=int(cells[5]),
        mean_concurrent_in_range=float(cells[6]),
    )


def write_sweep_csv(stats_list: Iterable[SimStats], path: Path) -> None:
    lines = [CSV_HEADER]
    lines.extend(_csv_row(s) for s in stats_list)
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text("\n".join(lines) + "\n", encoding="utf-8")
    tmp.replace(path)


def read_sweep_csv(path: Path) -> list:
    lines = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln]
    if not lines or lines[0] != CSV_HEADER:
        raise ReportFormatError("missing sweep header")
    return [_stats_from_csv_row(ln) for ln in lines[1:]]


def render_figures(stats_list: list, out_stem: Path) -> list:
    """Render sweep summary figures beside the CSV: the outcome mix per seed
    and the attempts-per-seed series. Returns the written paths."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    stats_list = list(stats_list)
    out_stem = Path(out_stem)
    seeds = [s.seed for s in stats_list]
    written = []

    fig, ax = plt.subplots(figsize=(7, 4))
    bottoms = [0] * len(stats_list)
    for label, color in (("successes", "#2a9d8f"), ("failures", "#e76f51"), ("rejections", "#adadad")):
        values = [getattr(s, label) for s in stats_list]
        ax.bar(range(len(seeds)), values, bottom=bottoms, label=label, color=color)
        bottoms = [b + v for b, v in zip(bottoms, values)]
    ax.set_xticks(range(len(seeds)))
    ax.set_xticklabels([str(s) for s in seeds], rotation=90, fontsize=7)
    ax.set_xlabel("seed")
    ax.set_ylabel("offers")
    ax.set_title("Broadcast outcome mix per seed")
    ax.legend()
    fig.tight_layout()
    path = out_stem.with_name(out_stem.name + "_outcomes.png")
    fig.savefig(path, dpi=110)
    plt.close(fig)
    written.append(path)

    fig, ax = plt.subplots(figsize=(7, 4))
    attempts = [s.attempts for s in stats_list]
    ax.plot(range(len(seeds)), attempts, marker="o", color="#264653")
    if attempts:
        mean = sum(attempts) / len(attempts)
        ax.axhline(mean, linestyle="--", color="#e9c46a", label=f"mean {mean:.0f}")
        ax.legend()
    ax.set_xticks(range(len(seeds)))
    ax.set_xticklabels([str(s) for s in seeds], rotation=90, fontsize=7)
    ax.set_xlabel("seed")
    ax.set_ylabel("attempts")
    ax.set_title("Offer attempts per seed")
    fig.tight_layout()
    path = out_stem.with_name(out_stem.name + "_attempts.png")
    fig.savefig(path, dpi=110)
    plt.close(fig)
    written.append(path)

    return written
