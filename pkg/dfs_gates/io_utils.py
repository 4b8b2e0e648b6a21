# dfs_gates/io_utils.py
from __future__ import annotations

import logging
from pathlib import Path
from typing import Iterable, Optional

import pandas as pd

from . import __version__

log = logging.getLogger(__name__)

FLOAT_FORMAT = "%.9g"
NA_REP = "none"


def ensure_outdir(name: str | Path = "outputs") -> Path:
    p = Path(name)
    p.mkdir(parents=True, exist_ok=True)
    return p


def provenance_line(cfg_hash: str, seed: int, dt: Optional[float]) -> str:
    dt_s = "none" if dt is None else f"{dt:.9g}"
    return f"# config-hash={cfg_hash}, seed={seed}, dt={dt_s}, version={__version__}"


def write_csv(df: pd.DataFrame, path: Path, provenance: str):
    """CSV with one leading provenance comment; fixed float formatting keeps reruns byte-identical."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    body = df.to_csv(index=False, float_format=FLOAT_FORMAT, na_rep=NA_REP, lineterminator="\n")
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(provenance + "\n")
        f.write(body)
    log.info("CSV written: %s", path)


def read_csv(path: Path) -> pd.DataFrame:
    return pd.read_csv(path, comment="#", na_values=[NA_REP], keep_default_na=False)


def write_report(lines: Iterable[str], path: Path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    log.info("Report written: %s", path)
