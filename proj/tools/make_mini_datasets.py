#!/usr/bin/env python3
# Copyright 2026 The qref Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Writes the miniature benchmark datasets under data/bench/mini.

The tables are synthetic stand-ins shaped like the Astronauts, Law Students,
MEPS and TPC-H inputs the scenarios are written for. Output is fully
determined by --seed.
"""

import argparse
import csv
import pathlib
import random


def write(path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def astronauts(rng, n):
    majors = ["Physics", "Aerospace Engineering", "Mechanical Engineering", "Medicine",
              "Geology", "Chemistry", "Mathematics", "Electrical Engineering"]
    rows = []
    for i in range(n):
        gender = "F" if rng.random() < 0.3 else "M"
        status = rng.choices(["Active", "Retired", "Management"], [0.3, 0.55, 0.15])[0]
        major = rng.choices(majors, [16, 3, 3, 2, 1, 1, 1, 2])[0]
        walks = rng.choices(range(9), [12, 14, 12, 9, 4, 2, 1, 1, 1])[0]
        hours = round(rng.uniform(100, 3000) + 900 * walks + rng.gauss(0, 400))
        rows.append([f"A{i + 1:03d}", gender, status, major, walks, max(0, hours)])
    return ["Name", "Gender", "Status", "Graduate Major", "Space Walks",
            "Space Flight (hrs)"], rows


def law(rng, n):
    regions = ["GL", "NE", "MW", "SC", "SE", "FW", "NW", "MS"]
    races = ["White", "Black", "Asian", "Hispanic", "Other"]
    rows = []
    for i in range(n):
        sex = "F" if rng.random() < 0.45 else "M"
        race = rng.choices(races, [60, 10, 12, 12, 6])[0]
        region = rng.choices(regions, [9, 2, 2, 2, 2, 2, 1, 1])[0]
        gpa = round(min(4.0, max(2.0, rng.gauss(3.55, 0.35))), 1)
        lsat = round(min(180, max(120, rng.gauss(152 + 6 * (gpa - 3.3), 8))))
        rows.append([i + 1, sex, race, region, gpa, lsat])
    return ["ID", "Sex", "Race", "Region", "GPA", "LSAT"], rows


def meps(rng, n):
    races = ["White", "Black", "Asian", "Other"]
    rows = []
    for i in range(n):
        sex = "F" if rng.random() < 0.52 else "M"
        race = rng.choices(races, [60, 18, 10, 12])[0]
        age = rng.randint(0, 85)
        family = min(8, 1 + int(rng.expovariate(0.3)))
        office = int(rng.expovariate(0.15))
        er = int(rng.expovariate(1.5))
        nights = int(rng.expovariate(1.2)) if rng.random() < 0.2 else 0
        home = int(rng.expovariate(0.3)) if rng.random() < 0.1 else 0
        rows.append([i + 1, sex, race, age, family, office, er, nights, home,
                     office + er + nights + home])
    return ["ID", "Sex", "Race", "Age", "Family Size", "Office Visits", "ER Visits",
            "Inpatient Nights", "Home Health Visits", "Utilization"], rows


def tpch(rng, orders, out):
    regions = ["AFRICA", "AMERICA", "ASIA", "EUROPE", "MIDDLE EAST"]
    write(out / "region.csv", ["RegionKey", "Region"],
          [[i, r] for i, r in enumerate(regions)])
    nations = [[i, f"NATION{i:02d}", i % len(regions)] for i in range(15)]
    write(out / "nation.csv", ["NationKey", "Nation", "RegionKey"], nations)
    segments = ["AUTOMOBILE", "BUILDING", "FURNITURE", "HOUSEHOLD", "MACHINERY"]
    customers = [[c + 1, rng.randrange(len(nations)), rng.choice(segments)]
                 for c in range(120)]
    write(out / "customer.csv", ["CustKey", "NationKey", "MktSeg"], customers)
    prios = ["1-URGENT", "2-HIGH", "3-MEDIUM", "4-NOT SPECIFIED", "5-LOW"]
    rows = []
    for o in range(orders):
        cust = rng.randrange(len(customers)) + 1
        rows.append([o + 1, cust, rng.choice(prios), round(rng.uniform(1000, 400000), 2)])
    write(out / "orders.csv", ["OrderKey", "CustKey", "OrderPrio", "Revenue"], rows)


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--seed", type=int, default=20230701)
    p.add_argument("--out", type=pathlib.Path,
                   default=pathlib.Path(__file__).resolve().parent.parent / "data/bench/mini")
    args = p.parse_args()
    rng = random.Random(args.seed)
    write(args.out / "astronauts.csv", *astronauts(rng, 360))
    write(args.out / "law.csv", *law(rng, 500))
    write(args.out / "meps.csv", *meps(rng, 400))
    tpch(rng, 600, args.out / "tpch")


if __name__ == "__main__":
    main()
