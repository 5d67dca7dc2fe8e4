#!/usr/bin/env python3
"""Reference subprocess MILP solver: reads an LP file, solves it with
scipy.optimize.milp (HiGHS), and writes a JSON solution file.

Usage: scipy_milp_solve.py model.lp solution.json [time_limit_seconds] [mip_rel_gap]
"""

import json
import re
import sys

import numpy as np
from scipy import optimize, sparse

INF = float("inf")

_SECTION = re.compile(
    r"^\s*(minimize|maximize|min|max|subject\s+to|st|s\.t\.|bounds|generals?|gen|"
    r"binar(?:y|ies)|bin|end)\s*$",
    re.IGNORECASE,
)

TOKEN = re.compile(
    r"\s*(?:(?P<cmp><=|>=|=|<|>)|(?P<sign>[+-])|"
    r"(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|"
    r"(?P<name>[^\s+\-<>=:]+))"
)


def tokenize(text):
    out = []
    for line in text.splitlines():
        line = line.split("\\")[0]
        if not line.strip():
            continue
        m = _SECTION.match(line)
        if m:
            out.append(("section", m.group(1).lower().replace(" ", "")))
            continue
        pos = 0
        label = re.match(r"\s*([^\s:]+)\s*:", line)
        if label:
            out.append(("label", label.group(1)))
            pos = label.end()
        for m in TOKEN.finditer(line, pos):
            if m.group("cmp"):
                out.append(("cmp", m.group("cmp")))
            elif m.group("sign"):
                out.append(("sign", m.group("sign")))
            elif m.group("num"):
                out.append(("num", float(m.group("num"))))
            else:
                out.append(("name", m.group("name")))
        out.append(("eol", None))
    return out


class LpProblem:
    def __init__(self):
        self.names = []
        self.index = {}
        self.obj = {}
        self.obj_const = 0.0
        self.obj_sign = 1.0
        self.rows = []  # (coeffs, sense, rhs)
        self.lb = {}
        self.ub = {}
        self.integer = set()

    def var(self, name):
        if name not in self.index:
            self.index[name] = len(self.names)
            self.names.append(name)
            self.lb[name] = -INF
            self.ub[name] = INF
        return name


def parse_expr(toks, i, prob):
    coeffs, const = {}, 0.0
    sign, coef, have = 1.0, 1.0, False
    while i < len(toks):
        kind, val = toks[i]
        if kind == "eol":
            i += 1
            continue
        if kind in ("cmp", "section", "label"):
            break
        if kind == "sign":
            if have:
                const += sign * coef
                have = False
                coef = 1.0
            sign = -sign if val == "-" else sign
        elif kind == "num":
            if have:
                const += sign * coef
                sign = 1.0
            coef, have = val, True
        elif kind == "name":
            if val.lower() in ("infinity", "inf"):
                coef, have = (coef if have else 1.0) * INF, True
            else:
                prob.var(val)
                coeffs[val] = coeffs.get(val, 0.0) + sign * (coef if have else 1.0)
                sign, coef, have = 1.0, 1.0, False
        i += 1
    if have:
        const += sign * coef
    return i, coeffs, const


def read_value(toks, i):
    sign = 1.0
    while i < len(toks) and toks[i][0] == "sign":
        if toks[i][1] == "-":
            sign = -sign
        i += 1
    kind, val = toks[i]
    if kind == "num":
        return i + 1, sign * val
    if kind == "name" and val.lower() in ("infinity", "inf"):
        return i + 1, sign * INF
    raise ValueError("expected bound value")


def parse_lp(text):
    toks = tokenize(text)
    prob = LpProblem()
    sec = None
    i = 0
    while i < len(toks):
        kind, val = toks[i]
        if kind == "section":
            if val in ("minimize", "min"):
                sec, prob.obj_sign = "obj", 1.0
            elif val in ("maximize", "max"):
                sec, prob.obj_sign = "obj", -1.0
            elif val in ("subjectto", "st", "s.t."):
                sec = "rows"
            elif val == "bounds":
                sec = "bounds"
            elif val in ("generals", "general", "gen"):
                sec = "generals"
            elif val in ("binary", "binaries", "bin"):
                sec = "binaries"
            elif val == "end":
                break
            i += 1
            continue
        if kind == "eol":
            i += 1
            continue
        if sec == "obj":
            if kind == "label":
                i += 1
                continue
            i, coeffs, const = parse_expr(toks, i, prob)
            for k, v in coeffs.items():
                prob.obj[k] = prob.obj.get(k, 0.0) + prob.obj_sign * v
            prob.obj_const += prob.obj_sign * const
            continue
        if sec == "rows":
            if kind == "label":
                i += 1
            i, coeffs, lhs_const = parse_expr(toks, i, prob)
            if i >= len(toks) or toks[i][0] != "cmp":
                raise ValueError("row without sense")
            sense = toks[i][1]
            i += 1
            i, rcoeffs, rconst = parse_expr(toks, i, prob)
            for k, v in rcoeffs.items():
                coeffs[k] = coeffs.get(k, 0.0) - v
            prob.rows.append((coeffs, sense, rconst - lhs_const))
            continue
        if sec == "bounds":
            if kind == "name" and val.lower() not in ("infinity", "inf"):
                name = prob.var(val)
                i += 1
                if i < len(toks) and toks[i][0] == "name" and toks[i][1].lower() == "free":
                    prob.lb[name], prob.ub[name] = -INF, INF
                    i += 1
                elif i < len(toks) and toks[i][0] == "cmp":
                    op = toks[i][1]
                    i, v = read_value(toks, i + 1)
                    if op in ("<=", "<"):
                        prob.ub[name] = v
                    elif op in (">=", ">"):
                        prob.lb[name] = v
                    else:
                        prob.lb[name] = prob.ub[name] = v
                continue
            i, lbv = read_value(toks, i)
            if toks[i][0] != "cmp":
                raise ValueError("malformed bound")
            i += 1
            name = prob.var(toks[i][1])
            i += 1
            prob.lb[name] = lbv
            if i < len(toks) and toks[i][0] == "cmp" and toks[i][1] in ("<=", "<"):
                i, prob.ub[name] = read_value(toks, i + 1)
            continue
        if sec in ("generals", "binaries"):
            if kind == "name":
                name = prob.var(val)
                prob.integer.add(name)
                if sec == "binaries":
                    prob.lb[name] = max(prob.lb.get(name, 0.0), 0.0)
                    prob.ub[name] = min(prob.ub.get(name, 1.0), 1.0)
            i += 1
            continue
        i += 1
    return prob


def solve(prob, time_limit, mip_rel_gap):
    n = len(prob.names)
    c = np.zeros(n)
    for k, v in prob.obj.items():
        c[prob.index[k]] = v
    data, rows_i, cols_i, lo, hi = [], [], [], [], []
    for r, (coeffs, sense, rhs) in enumerate(prob.rows):
        for k, v in coeffs.items():
            rows_i.append(r)
            cols_i.append(prob.index[k])
            data.append(v)
        if sense in ("<=", "<"):
            lo.append(-INF)
            hi.append(rhs)
        elif sense in (">=", ">"):
            lo.append(rhs)
            hi.append(INF)
        else:
            lo.append(rhs)
            hi.append(rhs)
    cons = []
    if prob.rows:
        A = sparse.csr_matrix((data, (rows_i, cols_i)), shape=(len(prob.rows), n))
        cons = [optimize.LinearConstraint(A, lo, hi)]
    integrality = np.array([1 if nm in prob.integer else 0 for nm in prob.names])
    bounds = optimize.Bounds(
        np.array([prob.lb[nm] for nm in prob.names]),
        np.array([prob.ub[nm] for nm in prob.names]),
    )
    res = optimize.milp(
        c,
        constraints=cons,
        integrality=integrality,
        bounds=bounds,
        options={"time_limit": time_limit, "mip_rel_gap": mip_rel_gap},
    )
    if res.status == 0:
        status = "optimal"
    elif res.status == 1:
        status = "time_limit"
    elif res.status == 2:
        status = "infeasible"
    else:
        status = "error"
    out = {"status": status, "objective": 0.0, "values": {}}
    if res.x is not None:
        out["objective"] = float(c @ res.x + prob.obj_const)
        out["values"] = {nm: float(res.x[j]) for j, nm in enumerate(prob.names)}
        bound = getattr(res, "mip_dual_bound", None)
        out["bound"] = float(bound) + prob.obj_const if bound is not None else out["objective"]
    return out


def main():
    if len(sys.argv) < 3:
        print(__doc__, file=sys.stderr)
        return 2
    lp_path, sol_path = sys.argv[1], sys.argv[2]
    time_limit = float(sys.argv[3]) if len(sys.argv) > 3 else 3600.0
    mip_rel_gap = float(sys.argv[4]) if len(sys.argv) > 4 else 0.0
    with open(lp_path) as f:
        prob = parse_lp(f.read())
    try:
        out = solve(prob, time_limit, mip_rel_gap)
    except Exception as e:  # noqa: BLE001
        out = {"status": "error", "message": str(e)}
    with open(sol_path, "w") as f:
        json.dump(out, f)
    return 0


if __name__ == "__main__":
    sys.exit(main())
