"""Regenerate the bundled Taiwan-shaped smoke-test fixture.

The rows are synthetic: they share the column layout and rough value ranges of
the credit-card default data but carry no real records. A handful of rows get
undocumented SEX / EDUCATION / MARRIAGE codes so that cleaning has work to do.
"""

import csv
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parents[1] / "src" / "burdenaudit" / "data" / "taiwan_fixture.csv"

PAY = ["PAY_0", "PAY_2", "PAY_3", "PAY_4", "PAY_5", "PAY_6"]
BILL = [f"BILL_AMT{i}" for i in range(1, 7)]
PAYAMT = [f"PAY_AMT{i}" for i in range(1, 7)]
HEADER = ["LIMIT_BAL", "SEX", "EDUCATION", "MARRIAGE", "AGE", *PAY, *BILL, *PAYAMT, "default.payment.next.month"]
# (row index, column, undocumented code)
OUT_OF_DOMAIN = [(7, "SEX", 3), (31, "SEX", 3), (58, "EDUCATION", 0), (90, "EDUCATION", 5),
                 (121, "EDUCATION", 6), (150, "MARRIAGE", 0), (177, "MARRIAGE", 0), (199, "SEX", 3)]


def main(n=200, seed=2021):
    rng = np.random.default_rng(seed)
    rows = []
    for _ in range(n):
        limit = int(rng.choice(np.arange(10_000, 500_001, 10_000)))
        sex = int(rng.choice([1, 2], p=[0.4, 0.6]))
        edu = int(rng.choice([1, 2, 3, 4], p=[0.35, 0.47, 0.16, 0.02]))
        mar = int(rng.choice([1, 2, 3], p=[0.45, 0.53, 0.02]))
        age = int(rng.integers(21, 70))
        risk = rng.normal()
        pay = [int(np.clip(round(risk + rng.normal(0, 0.7)), -2, 8)) for _ in PAY]
        bill = [int(max(0, limit * rng.uniform(0, 0.9) + rng.normal(0, 2000))) for _ in BILL]
        payamt = [int(abs(rng.normal(0.05, 0.05)) * b) for b in bill]
        z = -0.5 + 0.8 * pay[0] + 2.5 * (bill[0] / limit - 0.45) - payamt[0] / 5000
        y = int(rng.random() < 1 / (1 + np.exp(-z)))
        rows.append([limit, sex, edu, mar, age, *pay, *bill, *payamt, y])
    for i, col, code in OUT_OF_DOMAIN:
        rows[i][HEADER.index(col)] = code
    OUT.parent.mkdir(parents=True, exist_ok=True)
    with OUT.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(HEADER)
        w.writerows(rows)
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
