#!/usr/bin/env python3
"""Write the built-in scenario pack out as editable directive files.

Each scenario becomes one .scn file that `uamcas run` and `uamcas
validate` accept; re-parsing a written file reproduces the original
scenario exactly, so the export doubles as a round-trip check when
--check is given.
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from uamcas import scenario_io


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="pack", help="destination directory")
    ap.add_argument("--check", action="store_true",
                    help="re-parse every written file and compare")
    args = ap.parse_args(argv)

    pack = scenario_io.default_pack()
    paths = scenario_io.export_pack(pack, args.out)
    print(f"wrote {len(paths)} scenarios to {args.out}")

    if args.check:
        reloaded = scenario_io.load_pack(args.out)
        have = set(reloaded.ids())
        bad = [sid for sid in pack.ids()
               if sid not in have or reloaded[sid] != pack[sid]]
        if bad:
            print(f"round-trip mismatch: {', '.join(sorted(bad))}", file=sys.stderr)
            return 1
        print("round-trip check passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
