#!/usr/bin/env python3
"""External LP bridge: MPS in, JSON out.

Usage: lp_solve_scipy.py PROBLEM.mps RESULT.json

Reads the fixed-format MPS files written by the library (maximization,
rows are <= constraints, FR bounds mark free variables), solves with
scipy's HiGHS backend, and writes the JSON contract consumed by the
--lp-exec hook:

    {"status": "optimal" | "unbounded" | "infeasible",
     "x": [...], "objective": <float>}
"""

import json
import sys

import numpy as np
from scipy.optimize import linprog


def parse_mps(path):
    section = None
    obj_row = None
    rows = []          # (name, sense)
    row_index = {}
    cols = {}          # col -> {row: coeff}
    col_order = []
    rhs = {}
    free = set()
    maximize = False
    with open(path) as fh:
        for raw in fh:
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("*"):
                continue
            if not line[0].isspace():
                head = line.split()
                section = head[0]
                continue
            tok = line.split()
            if section == "OBJSENSE":
                maximize = tok[0].upper() in ("MAX", "MAXIMIZE")
            elif section == "ROWS":
                sense, name = tok[0], tok[1]
                if sense == "N":
                    obj_row = name
                else:
                    row_index[name] = len(rows)
                    rows.append((name, sense))
            elif section == "COLUMNS":
                name = tok[0]
                if name not in cols:
                    cols[name] = {}
                    col_order.append(name)
                for rname, val in zip(tok[1::2], tok[2::2]):
                    cols[name][rname] = float(val)
            elif section == "RHS":
                for rname, val in zip(tok[1::2], tok[2::2]):
                    rhs[rname] = float(val)
            elif section == "BOUNDS":
                kind, col = tok[0], tok[2]
                if kind == "FR":
                    free.add(col)
    n = len(col_order)
    m = len(rows)
    a = np.zeros((m, n))
    c = np.zeros(n)
    b = np.zeros(m)
    for j, name in enumerate(col_order):
        for rname, val in cols[name].items():
            if rname == obj_row:
                c[j] = val
            else:
                a[row_index[rname], j] = val
    for rname, val in rhs.items():
        if rname in row_index:
            b[row_index[rname]] = val
    senses = [s for (_, s) in rows]
    if any(s != "L" for s in senses):
        raise ValueError("only <= rows are expected from the library writer")
    bounds = [(None, None) if name in free else (0, None) for name in col_order]
    return c, a, b, bounds, maximize


def main():
    if len(sys.argv) != 3:
        print(__doc__, file=sys.stderr)
        return 1
    c, a, b, bounds, maximize = parse_mps(sys.argv[1])
    sign = -1.0 if maximize else 1.0
    res = linprog(sign * c, A_ub=a, b_ub=b, bounds=bounds, method="highs")
    out = {}
    if res.status == 0:
        out["status"] = "optimal"
        out["x"] = [float(v) for v in res.x]
        out["objective"] = float(c @ res.x)
    elif res.status == 3:
        out["status"] = "unbounded"
        out["x"] = [0.0] * len(c)
    elif res.status == 2:
        out["status"] = "infeasible"
        out["x"] = [0.0] * len(c)
    else:
        print(f"solver failure: {res.message}", file=sys.stderr)
        return 1
    with open(sys.argv[2], "w") as fh:
        json.dump(out, fh)
    return 0


if __name__ == "__main__":
    sys.exit(main())
