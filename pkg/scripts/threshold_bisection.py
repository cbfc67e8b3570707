"""Bracket the decay/growth transition for the family M * compact bump."""

import sys

from _common import finish, parser

from logheat.experiments import threshold_bisection


def main():
    p = parser(__doc__)
    p.add_argument("--half-width", type=float, default=3.0)
    p.add_argument("--max-probes", type=int, default=12)
    args = p.parse_args()
    res, rep = threshold_bisection(half_width=args.half_width, max_probes=args.max_probes)
    print(f"  K0={res.K0:.6f} M_decay={res.M_decay:.6g} M_growth={res.M_growth:.6g}")
    print(f"  bracket=({res.bracket[0]:.6f}, {res.bracket[1]:.6f}) probes={len(res.probes)}")
    return finish(rep, args.out)


if __name__ == "__main__":
    sys.exit(main())
