#!/usr/bin/env python3
"""Write one config file per point of a cartesian grid over config keys.

    python tools/gen_configs.py --base tests/fixtures/tz_mixed.cfg \
        --set bath.gamma=1,2,5 --set bath.alpha_z_over_pi=0.25,0.5 --outdir configs
"""
from __future__ import annotations

import argparse
import itertools
import sys
from pathlib import Path
from typing import Dict, List, Sequence

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from dfs_gates.config import canonical_lines, load_config, validate, with_value  # noqa: E402
from dfs_gates.errors import ConfigError  # noqa: E402


def value_tag(raw: str) -> str:
    """Filename-safe spelling of a value: 0.25 -> 0p25, -1 -> m1."""
    return raw.strip().replace("-", "m").replace(".", "p")


def key_tag(key: str) -> str:
    return key.rsplit(".", 1)[-1]


def parse_set(items: Sequence[str]) -> Dict[str, List[str]]:
    grid: Dict[str, List[str]] = {}
    for item in items:
        key, sep, values = item.partition("=")
        if not sep or not values.strip():
            raise ConfigError(f"expected key=v1,v2,..., got {item!r}")
        grid[key.strip()] = [v.strip() for v in values.split(",") if v.strip()]
    return grid


def generate(base: Path, grid: Dict[str, List[str]], outdir: Path, prefix: str = "run") -> List[Path]:
    cfg0 = load_config(base)
    outdir.mkdir(parents=True, exist_ok=True)
    keys = list(grid)
    written = []
    for combo in itertools.product(*(grid[k] for k in keys)):
        cfg = cfg0
        for k, v in zip(keys, combo):
            cfg = with_value(cfg, k, v)
        validate(cfg)
        name = "_".join([prefix] + [f"{key_tag(k)}{value_tag(v)}" for k, v in zip(keys, combo)])
        path = outdir / f"{name}.cfg"
        path.write_text("\n".join(canonical_lines(cfg)) + "\n", encoding="utf-8")
        written.append(path)
    return written


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--base", required=True, type=Path)
    ap.add_argument("--set", action="append", default=[], dest="items", help="key=v1,v2,...")
    ap.add_argument("--outdir", required=True, type=Path)
    ap.add_argument("--prefix", default="run")
    args = ap.parse_args()

    paths = generate(args.base, parse_set(args.items), args.outdir, args.prefix)
    print(f"{len(paths)} configs written to {args.outdir}")


if __name__ == "__main__":
    main()
