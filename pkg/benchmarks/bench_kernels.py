"""Timing comparison of the compiled and pure-numpy kernel lanes.

Runs each workload in a fresh subprocess so the lane choice (set by the
TUNNELSADDLE_NO_NUMBA environment variable at import time) is clean, and
reports best-of-N wall times plus the speedup of the compiled lane.

Workloads:
  path    complex-energy trajectory integration (adaptive RK path kernel)
  evolve  Crank-Nicolson wavefunction evolution (tridiagonal solve kernel)

Usage:
  python benchmarks/bench_kernels.py [--repeat 3] [--workloads path evolve]
"""

import argparse
import json
import os
import subprocess
import sys
import time

WORKLOADS = ("path", "evolve")


def _child(workload, repeat):
    """Run one workload in-process and print a JSON timing record."""
    from tunnelsaddle._kernels import kernels
    from tunnelsaddle.potential import Potential

    pot = Potential.well(4)
    if workload == "path":
        from tunnelsaddle.trajectory import integrate_eom

        def job():
            traj = integrate_eom(pot, 0.0, -0.0579379 + 0.0777944j,
                                 dual_frame=True)
            return traj.t.size
    elif workload == "evolve":
        from tunnelsaddle.oracle import default_grid, evolve, prepare_initial_state

        grid = default_grid(pot, 0.12)
        psi0 = prepare_initial_state(grid)

        def job():
            run = evolve(grid, psi0, pot, 10.0)
            return run.t.size
    else:
        raise SystemExit(f"unknown workload {workload!r}")

    size = job()  # warmup; includes JIT compilation on the compiled lane
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        job()
        times.append(time.perf_counter() - t0)
    print(json.dumps({"lane": kernels.name, "workload": workload,
                      "best": min(times), "times": times, "samples": size}))


def _time_lane(lane, workload, repeat):
    env = os.environ.copy()
    if lane == "numpy":
        env["TUNNELSADDLE_NO_NUMBA"] = "1"
    else:
        env.pop("TUNNELSADDLE_NO_NUMBA", None)
    out = subprocess.run(
        [sys.executable, os.path.abspath(__file__),
         "--child", workload, "--repeat", str(repeat)],
        env=env, capture_output=True, text=True, check=True, timeout=900,
    )
    rec = json.loads(out.stdout.strip().splitlines()[-1])
    if rec["lane"] != lane:
        print(f"warning: requested lane {lane!r} but got {rec['lane']!r} "
              "(is numba installed?)", file=sys.stderr)
    return rec


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3,
                    help="timed repetitions per lane (best is reported)")
    ap.add_argument("--workloads", nargs="+", default=list(WORKLOADS),
                    choices=WORKLOADS)
    ap.add_argument("--child", help=argparse.SUPPRESS)
    args = ap.parse_args(argv)

    if args.child:
        _child(args.child, args.repeat)
        return 0

    rows = []
    for workload in args.workloads:
        recs = {lane: _time_lane(lane, workload, args.repeat)
                for lane in ("numba", "numpy")}
        rows.append((workload, recs["numba"]["best"], recs["numpy"]["best"],
                     recs["numba"]["samples"]))

    print(f"{'workload':<10}{'numba [s]':>12}{'numpy [s]':>12}"
          f"{'speedup':>10}{'samples':>10}")
    for workload, tn, tp, size in rows:
        print(f"{workload:<10}{tn:>12.4f}{tp:>12.4f}{tp / tn:>10.2f}"
              f"{size:>10d}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
