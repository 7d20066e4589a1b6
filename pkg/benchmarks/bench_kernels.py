"""Time the compiled and numpy backends on the two hot kernels.

    python benchmarks/bench_kernels.py [--n 1024] [--steps 20000] [--n-beta 256] [--calls 20000]

Both backends are fed identical inputs; the script also reports whether
their outputs agree bit for bit.
"""
import argparse
import time

import numpy as np

from qsd import kernels
from qsd.dispersion import beta_grid, coth_profile
from qsd.model import PhysicalParams, Potential
from qsd.pde import build_effective_fields, gaussian_state, stable_dt


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def bench_pde(backend, n, steps, repeat):
    p = PhysicalParams(hbar=0.5)
    s = gaussian_state(-4.0, 4.0, n, 0.5)
    f = build_effective_fields(Potential.double_well(0.25, 1.0), p, "ankerhold", s.x)
    dt = stable_dt(f, p, s.dx)

    def run():
        P = s.P.copy()
        backend.pde_heun_steps(P, f.d_eff, f.v_eff_prime, p.zeta, s.dx, dt, steps)
        return P

    return best_of(run, repeat)


def bench_beta(backend, n_beta, calls, repeat):
    p = PhysicalParams(omega0=1.0)
    g = beta_grid(p, n_beta)
    s = coth_profile(g, p)
    out = np.empty(n_beta)

    def run():
        for _ in range(calls):
            backend.beta_family_rhs(s, g, p.zeta, p.mass, p.hbar, p.omega0, out)
        return out.copy()

    return best_of(run, repeat)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1024, help="PDE grid points")
    ap.add_argument("--steps", type=int, default=20000, help="PDE time steps per timing")
    ap.add_argument("--n-beta", type=int, default=256, help="beta-grid size")
    ap.add_argument("--calls", type=int, default=20000, help="right-hand-side calls per timing")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    if kernels.compiled_backend is None:
        print("compiled extension not built; timing the numpy backend only")
    backends = [("numpy", kernels.python_backend)]
    if kernels.compiled_backend is not None:
        backends.append(("cython", kernels.compiled_backend))

    cases = [
        (f"pde_heun_steps  n={args.n} steps={args.steps}",
         lambda b: bench_pde(b, args.n, args.steps, args.repeat)),
        (f"beta_family_rhs n_beta={args.n_beta} calls={args.calls}",
         lambda b: bench_beta(b, args.n_beta, args.calls, args.repeat)),
    ]
    for label, case in cases:
        results = {name: case(b) for name, b in backends}
        line = [label]
        for name, (secs, _) in results.items():
            line.append(f"{name} {secs:8.4f} s")
        if len(results) == 2:
            (t_py, out_py), (t_cy, out_cy) = results["numpy"], results["cython"]
            line.append(f"speed-up {t_py / t_cy:5.1f}x")
            line.append("identical" if np.array_equal(out_py, out_cy) else "DIFFERENT")
        print("  ".join(line))


if __name__ == "__main__":
    main()
