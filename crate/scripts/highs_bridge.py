#!/usr/bin/env python3
"""Solve an LP file with HiGHS and write a solution file for robust-rcpsp.

Usage: highs_bridge.py MODEL.lp WARM.mst|'' SOLUTION.sol TIME_LIMIT_S

Bridge template:
    python3 scripts/highs_bridge.py {lp} {mst} {sol} {time_s}
"""

import math
import sys

import highspy


def read_mst(path):
    values = {}
    with open(path) as fh:
        for line in fh:
            parts = line.split()
            if len(parts) == 2:
                values[parts[0]] = float(parts[1])
    return values


def main(argv):
    if len(argv) != 5:
        print(__doc__, file=sys.stderr)
        return 2
    lp_path, mst_path, sol_path, time_s = argv[1], argv[2], argv[3], float(argv[4])

    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("time_limit", time_s)
    h.setOptionValue("mip_rel_gap", 0.0)
    h.setOptionValue("mip_abs_gap", 1e-9)
    h.setOptionValue("mip_feasibility_tolerance", 1e-7)
    if h.readModel(lp_path) != highspy.HighsStatus.kOk:
        with open(sol_path, "w") as fh:
            fh.write("error\n")
        return 1

    lp = h.getLp()
    names = list(lp.col_names_)
    if mst_path:
        warm = read_mst(mst_path)
        sol = highspy.HighsSolution()
        sol.col_value = [warm.get(n, 0.0) for n in names]
        sol.value_valid = True
        h.setSolution(sol)

    h.run()
    status = h.getModelStatus()
    info = h.getInfo()
    has_primal = info.primal_solution_status == 2
    ms = highspy.HighsModelStatus
    if status == ms.kOptimal:
        head = "optimal"
    elif status in (ms.kInfeasible,):
        head = "infeasible"
    elif status in (ms.kTimeLimit, ms.kIterationLimit, ms.kSolutionLimit, ms.kInterrupt):
        head = "timeout"
    else:
        head = "error"

    with open(sol_path, "w") as fh:
        bound = getattr(info, "mip_dual_bound", None)
        if head in ("optimal", "timeout") and bound is not None and math.isfinite(bound):
            fh.write(f"{head} {bound!r}\n")
        else:
            fh.write(f"{head}\n")
        if head in ("optimal", "timeout") and has_primal:
            values = h.getSolution().col_value
            for n, v in zip(names, values):
                fh.write(f"{n} {v!r}\n")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
