"""Number of elements of each length in a presented monoid, read off the
normal forms of a completed rewriting system."""
import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

from maxorders.bundle import load_bundle
from maxorders.presentations import complete, enumerate_elements, parse_presentation


@dataclass
class Config:
    source: str = "example4-main"
    max_len: int = 8
    max_rules: int = 500


def load(source):
    path = Path(source)
    if path.is_file():
        return parse_presentation(path.read_text())
    return load_bundle(source).presentation


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("source", nargs="?", default=Config.source, help="bundle name or presentation file")
    ap.add_argument("--max-len", type=int, default=Config.max_len)
    ap.add_argument("--max-rules", type=int, default=Config.max_rules)
    cfg = Config(**vars(ap.parse_args(argv)))
    rs = complete(load(cfg.source), max_rules=cfg.max_rules)
    _, counts = enumerate_elements(rs, cfg.max_len)
    total = 0
    print(f"{'length':>6} {'count':>8} {'cumulative':>11}")
    for n, c in enumerate(counts):
        total += c
        print(f"{n:>6} {c:>8} {total:>11}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
