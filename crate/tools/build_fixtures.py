#!/usr/bin/env python3
"""Build the bundled race-pool CSV fixtures from the per-season source files.

Each source file in crates/core/data/seasons/ lists, per race, the drivers
who finished in the top ten (in finishing order), using three-letter codes.
Drivers are indexed by their final championship standing, as given by the
`drivers` line. `merge A B` folds driver A's results into driver B's record
(substitute drivers sharing a seat).

The script checks every season against the known championship points totals
(`points` line) under the rules actually used that season, then writes:

    crates/core/data/standard.csv       seasons 2010-2019
    crates/core/data/small_margin.csv   seasons 2007, 2008, 2009, 2010, 2012, 2016
    crates/core/data/f1_2007_2019.csv   all thirteen seasons

Run from the workspace root:  python3 tools/build_fixtures.py [--check]
"""

import argparse
import sys
from fractions import Fraction
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
DATA = ROOT / "crates" / "core" / "data"

SYSTEMS = {
    "S3": [10, 8, 6, 5, 4, 3, 2, 1],
    "S4": [25, 18, 15, 12, 10, 8, 6, 4, 2, 1],
}

STANDARD = list(range(2010, 2020))
SMALL_MARGIN = [2007, 2008, 2009, 2010, 2012, 2016]


class Season:
    def __init__(self, path):
        self.path = path
        self.year = None
        self.system = None
        self.double = set()
        self.half = set()
        self.fastest_lap = False
        self.drivers = []
        self.merges = {}
        self.points = {}
        self.races = []  # list of (name, [codes], fl)
        self._parse()

    def _parse(self):
        for raw in self.path.read_text().splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, _, rest = line.partition(" ")
            if key == "season":
                self.year = int(rest)
            elif key == "system":
                self.system = rest.strip()
            elif key == "double":
                self.double.update(int(x) for x in rest.split())
            elif key == "half":
                self.half.update(int(x) for x in rest.split())
            elif key == "fastest_lap_point":
                self.fastest_lap = rest.strip() == "true"
            elif key == "drivers":
                self.drivers = rest.split()
            elif key == "merge":
                a, b = rest.split()
                self.merges[a] = b
            elif key == "points":
                toks = rest.split()
                for code, pts in zip(toks[::2], toks[1::2]):
                    self.points[code] = Fraction(pts)
            elif key == "race":
                parts = [p.strip() for p in rest.split("|")]
                name, order = parts[0], parts[1].split()
                fl = None
                for extra in parts[2:]:
                    k, v = extra.split()
                    if k == "fl":
                        fl = v
                self.races.append((name, order, fl))
            else:
                raise ValueError(f"{self.path}: unknown directive {key!r}")

    def canonical(self, code):
        return self.merges.get(code, code)

    def check(self):
        problems = []
        index = {d: i for i, d in enumerate(self.drivers)}
        if len(index) != len(self.drivers):
            problems.append("duplicate driver code in drivers line")
        seen = set()
        totals = {d: Fraction(0) for d in self.drivers}
        scale = SYSTEMS[self.system]
        for r, (name, order, fl) in enumerate(self.races, start=1):
            canon = [self.canonical(c) for c in order]
            if len(set(canon)) != len(canon):
                problems.append(f"race {r} {name}: duplicate driver")
            for c in canon:
                if c not in index:
                    problems.append(f"race {r} {name}: unknown driver {c}")
            if len(order) > 10:
                problems.append(f"race {r} {name}: more than ten finishers")
            factor = Fraction(1)
            if r in self.double:
                factor = Fraction(2)
            if r in self.half:
                factor = Fraction(1, 2)
            for place, c in enumerate(canon, start=1):
                seen.add(c)
                if place <= len(scale) and c in totals:
                    totals[c] += factor * scale[place - 1]
            if self.fastest_lap and fl is not None:
                fl = self.canonical(fl)
                if fl in canon and fl in totals:
                    totals[fl] += 1
        for d in self.drivers:
            if d not in seen:
                problems.append(f"{d} never finished in the top ten")
            want = self.points.get(d)
            if want is not None and totals[d] != want:
                problems.append(f"{d}: computed {totals[d]} expected {want}")
        return problems

    def rows(self):
        index = {d: i + 1 for i, d in enumerate(self.drivers)}
        for r, (_, order, _) in enumerate(self.races, start=1):
            for place, c in enumerate(order, start=1):
                yield (self.year, r, index[self.canonical(c)], place)


def write_csv(path, seasons):
    lines = ["season,race,driver,position"]
    for s in seasons:
        for row in s.rows():
            lines.append(",".join(str(x) for x in row))
    path.write_text("\n".join(lines) + "\n")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--check", action="store_true", help="only run the checks")
    args = ap.parse_args()

    seasons = {}
    for p in sorted((DATA / "seasons").glob("*.txt")):
        s = Season(p)
        seasons[s.year] = s

    bad = False
    for year, s in sorted(seasons.items()):
        problems = s.check()
        status = "ok" if not problems else f"{len(problems)} problem(s)"
        print(f"{year}: {len(s.drivers)} drivers, {len(s.races)} races, {status}")
        for p in problems:
            print(f"    {p}")
        bad |= bool(problems)

    if not args.check:
        write_csv(DATA / "standard.csv", [seasons[y] for y in STANDARD])
        write_csv(DATA / "small_margin.csv", [seasons[y] for y in SMALL_MARGIN])
        write_csv(DATA / "f1_2007_2019.csv", [seasons[y] for y in sorted(seasons)])
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
