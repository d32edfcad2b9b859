# Copyright 2026 The metareg Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Convert a study-level spreadsheet into the CSV layout read by `metareg`.

Output columns: study_id, events, total, then the requested moderators.
Rows are written as they are; complete-case filtering happens at fit time.

  python3 tools/prepare_dataset.py mortality.xlsx data/one_year_mortality.csv \
      --id Study --events Deaths --total N --moderator year=MedianYear \
      --moderator age=MeanAge

When the sheet holds a proportion instead of a count, pass --rate <column>;
events are then round(rate * total).
"""

import argparse
import sys

import pandas as pd


def parse_args(argv):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("source", help="input .xlsx/.xls/.csv")
    p.add_argument("dest", help="output CSV")
    p.add_argument("--sheet", default=0, help="sheet name or index for workbooks")
    p.add_argument("--id", required=True, help="study label column")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--events", help="event count column")
    g.add_argument("--rate", help="event proportion column (0-1, or 0-100 with --percent)")
    p.add_argument("--percent", action="store_true", help="--rate is given in percent")
    p.add_argument("--total", required=True, help="sample size column")
    p.add_argument("--moderator", action="append", default=[], metavar="NAME=COLUMN",
                   help="moderator to keep, renamed to NAME (repeatable)")
    return p.parse_args(argv)


def load(path, sheet):
    if path.lower().endswith((".xlsx", ".xls")):
        try:
            sheet = int(sheet)
        except ValueError:
            pass
        return pd.read_excel(path, sheet_name=sheet)
    return pd.read_csv(path)


def main(argv):
    args = parse_args(argv)
    df = load(args.source, args.sheet)
    df.columns = [str(c).strip() for c in df.columns]

    wanted = [args.id, args.total, args.events or args.rate]
    mods = []
    for item in args.moderator:
        name, sep, col = item.partition("=")
        if not sep:
            name = col = item
        mods.append((name.strip(), col.strip()))
        wanted.append(col.strip())
    missing = [c for c in wanted if c not in df.columns]
    if missing:
        sys.exit(f"columns not found: {', '.join(missing)}\navailable: {', '.join(df.columns)}")

    out = pd.DataFrame({"study_id": df[args.id].astype(str).str.strip()})
    total = pd.to_numeric(df[args.total], errors="coerce")
    if args.events:
        events = pd.to_numeric(df[args.events], errors="coerce")
    else:
        rate = pd.to_numeric(df[args.rate], errors="coerce")
        if args.percent:
            rate = rate / 100.0
        events = (rate * total).round()
    keep = total.notna() & events.notna()
    dropped = int((~keep).sum())
    out["events"] = events
    out["total"] = total
    for name, col in mods:
        out[name] = pd.to_numeric(df[col], errors="coerce")
    out = out[keep].astype({"events": "int64", "total": "int64"})
    out.to_csv(args.dest, index=False)

    complete = int(out[[n for n, _ in mods]].notna().all(axis=1).sum()) if mods else len(out)
    print(f"wrote {len(out)} studies to {args.dest} ({dropped} without events/total skipped, "
          f"{complete} complete on all moderators)", file=sys.stderr)


if __name__ == "__main__":
    main(sys.argv[1:])
