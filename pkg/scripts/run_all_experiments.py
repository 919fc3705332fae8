#!/usr/bin/env python3
"""Run every experiment preset and report one line per run.

Artifacts land in <out>/<preset>/ with a manifest each; the sphere-geodesic
sweep additionally writes the objective grid used by the figure renderer.
Exits nonzero if any solve breaches an invariant.
"""

import argparse
import sys
import time
from pathlib import Path

from frida.experiments import run_preset
from frida.presets import PRESET_NAMES


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path("runs"))
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--preset", choices=PRESET_NAMES, default=None,
                    help="run a single preset instead of all")
    ap.add_argument("--sweep", action="store_true",
                    help="also write sweep-only artifacts (objective grid)")
    args = ap.parse_args()

    names = [args.preset] if args.preset else list(PRESET_NAMES)
    failed = []
    for name in names:
        t0 = time.time()
        art = run_preset(name, args.seed, args.out / name, sweep=args.sweep)
        checks = art.summary["checks"]
        ok = checks["all_valid"] and checks["all_complexity"] and checks["all_rel_error"]
        if not ok:
            failed.append(name)
        print(f"{name:<22s} {checks['n_solves']:3d} solves  "
              f"{time.time() - t0:6.1f}s  statuses={checks['statuses']}  "
              f"{'ok' if ok else 'INVARIANT FAILURE'}")
    if failed:
        print(f"failed: {', '.join(failed)}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
