"""Compare the numba kernels with the pure-numpy fallback.

Each backend runs in its own interpreter because the backend is fixed at
import time by COURNOT_DISABLE_JIT.  Usage::

    python benchmarks/bench_kernels.py [--repeat 3] [--json out.json]
"""
import argparse
import json
import os
import subprocess
import sys
import textwrap

WORKER = textwrap.dedent(
    """
    import json, sys, time
    import numpy as np
    from cournot_duo import Model, backend_name
    from cournot_duo.cli import sample_specs
    from cournot_duo.dynamics import orbit_tails
    from cournot_duo.equilibrium import equilibrium_point
    from cournot_duo.stability import agreement_codes, equilibrium_jury

    repeat = int(sys.argv[1])

    def timed(fn):
        fn()  # warm-up (includes compilation for numba)
        best = float("inf")
        for _ in range(repeat):
            t = time.perf_counter()
            fn()
            best = min(best, time.perf_counter() - t)
        return best

    P = sample_specs(Model.GA, 200_000, seed=1)
    Q = sample_specs(Model.GB, 2_000, seed=2)
    q1, q2 = equilibrium_point(False, Q[:, 0], Q[:, 1])
    S0 = np.column_stack([q1, q2]) * 0.9
    out = {
        "backend": backend_name(),
        "jury_at_E_ga_200k": timed(lambda: equilibrium_jury(Model.GA.code, False, P)),
        "agreement_ga_200k": timed(lambda: agreement_codes(Model.GA.code, False, P)),
        "orbits_gb_2k_x_2k_steps": timed(lambda: orbit_tails(Model.GB.code, False, Q, S0, 2000, 10)),
    }
    print(json.dumps(out))
    """
)


def run(disable_jit: bool, repeat: int) -> dict:
    env = dict(os.environ)
    env["COURNOT_DISABLE_JIT"] = "1" if disable_jit else "0"
    env.setdefault("COURNOT_THREADS", "1")
    res = subprocess.run([sys.executable, "-c", WORKER, str(repeat)], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(res.stdout.strip().splitlines()[-1])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", default=None, help="also write results here")
    args = ap.parse_args()
    fast = run(False, args.repeat)
    slow = run(True, args.repeat)
    print(f"{'workload':<28}{fast['backend']:>12}{slow['backend']:>12}{'speedup':>10}")
    for key in fast:
        if key == "backend":
            continue
        print(f"{key:<28}{fast[key]:>11.4f}s{slow[key]:>11.4f}s{slow[key] / fast[key]:>9.1f}x")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump({"compiled": fast, "fallback": slow}, fh, indent=2)


if __name__ == "__main__":
    main()
