"""Replay every bundled example and print a one-line summary per bundle."""
import argparse
import sys
import time
from dataclasses import dataclass
from typing import Optional

from maxorders.bundle import bundled_names
from maxorders.replay import replay


@dataclass
class Config:
    radius: Optional[int] = None
    box: Optional[int] = None
    check_len: Optional[int] = None


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--radius", type=int)
    ap.add_argument("--box", type=int)
    ap.add_argument("--check-len", type=int)
    ns = ap.parse_args(argv)
    cfg = Config(ns.radius, ns.box, ns.check_len)
    bounds = {k: v for k, v in vars(cfg).items() if v is not None}
    failed = 0
    for name in bundled_names():
        t0 = time.perf_counter()
        rep = replay(name, **bounds)
        dt = time.perf_counter() - t0
        mark = "ok  " if rep["ok"] else "DIFF"
        print(f"{mark} {name:<20} {len(rep['checked']):>3} fields  {dt:6.2f}s")
        for key, d in rep["diff"].items():
            print(f"       {key}: expected {d['expected']!r}, got {d['got']!r}")
        failed += not rep["ok"]
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
