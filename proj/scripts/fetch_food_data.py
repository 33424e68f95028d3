#!/usr/bin/env python3
"""Fetch the food nutrition table and write data/food.csv.

Downloads a spreadsheet of 872 foods with calories, protein, fat and
carbohydrate content per 100 g, normalizes the column names, and writes
data/food.csv with columns Food,Calories,Protein,Fat,Carbs. The food
fixtures in the acceptance suite activate once that file exists; they
expect exactly this shape (872 rows, 241 of them with Fat equal to 0),
which this script verifies before writing anything.
"""

import argparse
import hashlib
import io
import sys
import urllib.request
from pathlib import Path

DEFAULT_URL = "https://www.csun.edu/science/ref/spreadsheets/xls/nutrition.xls"
EXPECTED_ROWS = 872
EXPECTED_NO_FAT = 241


def find_column(columns, token):
    names = [str(c).strip() for c in columns]
    exact = [c for c in names if c.lower().startswith(token)]
    loose = [c for c in names if token in c.lower()]
    for candidates in (exact, loose):
        if len(candidates) == 1:
            return candidates[0]
    sys.exit(f"error: cannot identify a unique '{token}' column in {names}")


def main():
    parser = argparse.ArgumentParser(
        description="Fetch the food nutrition dataset used by the "
        "acceptance suite's real-data fixtures."
    )
    parser.add_argument("--url", default=DEFAULT_URL, help="source spreadsheet")
    parser.add_argument(
        "--out",
        type=Path,
        default=Path(__file__).resolve().parent.parent / "data" / "food.csv",
        help="output CSV path (default: <repo>/data/food.csv)",
    )
    args = parser.parse_args()

    try:
        import pandas as pd
    except ImportError:
        sys.exit("error: pandas is required (pip install pandas xlrd)")

    print(f"downloading {args.url}")
    raw = urllib.request.urlopen(args.url, timeout=60).read()
    print(f"sha256: {hashlib.sha256(raw).hexdigest()} ({len(raw)} bytes)")

    try:
        df = pd.read_excel(io.BytesIO(raw))
    except ImportError:
        sys.exit("error: the .xls reader is missing (pip install xlrd)")

    columns = {
        "Food": find_column(df.columns, "food"),
        "Calories": find_column(df.columns, "calor"),
        "Protein": find_column(df.columns, "protein"),
        "Fat": find_column(df.columns, "fat"),
        "Carbs": find_column(df.columns, "carb"),
    }
    out = df[[columns[k] for k in columns]].copy()
    out.columns = list(columns)
    for name in ("Calories", "Protein", "Fat", "Carbs"):
        out[name] = pd.to_numeric(out[name], errors="coerce")
    out = out.dropna(subset=["Calories", "Protein", "Fat", "Carbs"])

    rows = len(out)
    no_fat = int((out["Fat"] == 0).sum())
    if rows != EXPECTED_ROWS or no_fat != EXPECTED_NO_FAT:
        sys.exit(
            f"error: unexpected dataset shape: {rows} rows "
            f"({EXPECTED_ROWS} expected), {no_fat} no-fat rows "
            f"({EXPECTED_NO_FAT} expected); not writing {args.out}"
        )

    args.out.parent.mkdir(parents=True, exist_ok=True)
    out.to_csv(args.out, index=False)
    print(f"wrote {args.out}: {rows} rows, {no_fat} without fat")


if __name__ == "__main__":
    main()
