"""Time-domain cross-check at several drive ratios.

Prints, for each ratio eps_p/eps_c = eps_m/eps_c, the relative deviation of
each extracted optical tone from the closed-form coefficient and the
residual (non-linear) power left in the cavity field. Use --dt-study to
repeat the middle ratio at several time steps and see the integrator floor.

    python3 scripts/oracle_ladder.py [--ratios 1e-2 1e-3 1e-4] [--long-run]
"""

import argparse
import time

from omfields.model import experiment_params
from omfields.oracle import cross_check


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--ratios", type=float, nargs="+", default=[1e-2, 1e-3, 1e-4])
    parser.add_argument("--steps-per-period", type=int, default=128)
    parser.add_argument("--scheme", choices=("rk4", "rk45-adaptive"), default="rk4")
    parser.add_argument("--long-run", action="store_true", help="experimental gamma_m (slow)")
    parser.add_argument("--dt-study", action="store_true")
    args = parser.parse_args(argv)

    params = experiment_params() if args.long_run else None
    print(f"{'ratio':>8} {'steps/T':>8} {'max dev':>10} {'a_p+':>10} {'a_p-':>10} {'a_m+':>10} {'a_m-':>10} "
          f"{'residual':>10} {'time':>7}")

    def row(ratio, spp):
        start = time.perf_counter()
        c = cross_check(params, ratio=ratio, steps_per_period=spp, scheme=args.scheme)
        devs = " ".join(f"{t.rel_dev:10.2e}" for t in c.tones)
        print(f"{ratio:8.0e} {spp:8d} {c.max_rel_dev:10.2e} {devs} {c.residual_power:10.2e} "
              f"{time.perf_counter() - start:6.1f}s")

    for ratio in args.ratios:
        row(ratio, args.steps_per_period)
    if args.dt_study:
        mid = sorted(args.ratios)[len(args.ratios) // 2]
        for spp in (64, 128, 256):
            row(mid, spp)


if __name__ == "__main__":
    main()
