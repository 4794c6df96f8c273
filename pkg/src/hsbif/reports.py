"""Deterministic report emission.

Reports are JSON with sorted keys and no volatile content, so identical
config + version produces byte-identical files; the timestamp lives in a
separate sidecar metadata file.
"""

from __future__ import annotations

import datetime
import json
from pathlib import Path

from . import __version__
from .config import RunConfig


def report_payload(config: RunConfig, result: dict) -> dict:
    return {
        "version": __version__,
        "config": config.to_dict(),
        "result": result,
    }


def write_report(out_dir: str | Path, name: str, config: RunConfig, result: dict) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{name}.json"
    path.write_text(
        json.dumps(report_payload(config, result), indent=2, sort_keys=True,
                   allow_nan=True)
        + "\n"
    )
    meta = out / f"{name}.meta.json"
    meta.write_text(
        json.dumps(
            {
                "written_utc": datetime.datetime.now(datetime.timezone.utc)
                .replace(microsecond=0)
                .isoformat(),
                "report": path.name,
            },
            indent=2,
            sort_keys=True,
        )
        + "\n"
    )
    return path


def write_csv(out_dir: str | Path, name: str, header: list[str], rows) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{name}.csv"
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(f"{v:.12g}" if isinstance(v, float) else str(v) for v in row) + "\n")
    return path
