"""Decay/growth around the steady state: runs from (1 -+ eps) phi."""

import sys

from _common import finish, parser

from logheat.experiments import dichotomy_sweep


def main():
    p = parser(__doc__)
    p.add_argument("--eps", type=float, nargs="+", default=[0.1, 0.5])
    p.add_argument("--dx", type=float, default=0.01)
    p.add_argument("--t-end", type=float, default=4.0)
    p.add_argument("--steady", action="store_true", help="also run phi itself")
    p.add_argument("--jobs", type=int, default=1)
    args = p.parse_args()
    rep = dichotomy_sweep(args.eps, dx=args.dx, t_end=args.t_end, include_steady=args.steady, jobs=args.jobs)
    for label, o in rep.outcomes.items():
        print(f"  {label}: {o['regime']} psi_hat={o['psi_hat_limit']:.5f} predicted={o['psi_predicted']:.5f}")
    return finish(rep, args.out)


if __name__ == "__main__":
    sys.exit(main())
