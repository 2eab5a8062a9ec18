#!/usr/bin/env python3
"""Solve an SDPA sparse (.dat-s) file with cvxpy and report the verdict.

The file encodes   max tr(F0 Y)  s.t.  tr(F_k Y) = c_k,  Y >= 0   (SDPA's D).
Our exporter stores min <C,X> s.t. <A_i,X> = b_i as F_k = A_k, c = b,
F0 = -C, so the printed objective (negated back) matches the primal optimum.
"""
import sys

import numpy as np
import cvxpy as cp


def parse(path):
    lines = []
    with open(path) as f:
        for line in f:
            s = line.strip()
            if not s or s[0] in '"*#':
                continue
            lines.append(s)
    m = int(lines[0].split()[0])
    for ch in ',(){}':
        lines[2] = lines[2].replace(ch, ' ')
    sizes = [abs(int(t)) for t in lines[2].split()]
    c = [float(x) for x in lines[3].split()]
    entries = []
    for line in lines[4:]:
        p = line.split()
        entries.append((int(p[0]), int(p[1]), int(p[2]), int(p[3]), float(p[4])))
    return m, sizes, c, entries


def main():
    if len(sys.argv) != 2:
        print("usage: sdpa_check.py problem.dat-s", file=sys.stderr)
        return 3
    m, sizes, c, entries = parse(sys.argv[1])
    mats = {}
    for (mat, blk, i, j, v) in entries:
        blocks = mats.setdefault(mat, [np.zeros((n, n)) for n in sizes])
        blocks[blk - 1][i - 1, j - 1] = v
        blocks[blk - 1][j - 1, i - 1] = v

    Y = [cp.Variable((n, n), symmetric=True) for n in sizes]
    constraints = [y >> 0 for y in Y]
    for k in range(1, m + 1):
        expr = 0
        for b, M in enumerate(mats.get(k, [])):
            if np.any(M):
                expr = expr + cp.trace(M @ Y[b])
        constraints.append(expr == c[k - 1])
    objective = 0
    for b, M in enumerate(mats.get(0, [])):
        if np.any(M):
            objective = objective + cp.trace(M @ Y[b])

    problem = cp.Problem(cp.Maximize(objective), constraints)
    try:
        value = problem.solve()
    except cp.error.SolverError as exc:
        print(f"status=error detail={exc}")
        return 2

    if problem.status in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE):
        print(f"status=optimal objective={-value:.12g}")
        return 0
    if problem.status in (cp.INFEASIBLE, cp.INFEASIBLE_INACCURATE):
        print("status=infeasible")
        return 1
    print(f"status={problem.status}")
    return 2


if __name__ == "__main__":
    sys.exit(main())
