"""Shared argument handling for the experiment scripts."""
import argparse
from pathlib import Path


def parser(description, iterations=200_000, seeds=20):
    ap = argparse.ArgumentParser(description=description)
    ap.add_argument("--out", type=Path, default=Path("results"))
    ap.add_argument("--iterations", type=int, default=iterations)
    ap.add_argument("--seeds", type=int, default=seeds, help="number of seeds, starting at 0")
    ap.add_argument("--jobs", type=int, default=1)
    return ap


def write(out: Path, name: str, text: str) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / name).write_text(text)
    print(f"wrote {out / name}")
