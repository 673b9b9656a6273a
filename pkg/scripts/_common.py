"""Shared helpers for the experiment scripts."""
from __future__ import annotations

import argparse
import logging
from pathlib import Path

from dipsqueeze.cli import write_csv, write_manifest


def parser(description: str) -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(description=description)
    ap.add_argument("--out", default="results", help="output directory")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def setup(args) -> Path:
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def save(out: Path, name: str, columns: dict, params: dict, extra: dict | None = None) -> None:
    write_csv(out / f"{name}.csv", columns)
    write_manifest(out / f"{name}.manifest", params, extra or {})
    print(f"wrote {out / name}.csv")
