"""Defocusing spreading from a unit bump: a priori bounds and front speed."""

import sys

from _common import finish, parser

from logheat.experiments import kpp_spreading


def main():
    p = parser(__doc__)
    p.add_argument("--t-end", type=float, default=3.5)
    args = p.parse_args()
    rep = kpp_spreading(t_end=args.t_end)
    for t, x in rep.outcomes["front_series"][::5]:
        print(f"  t={t:.2f} front={x}")
    return finish(rep, args.out)


if __name__ == "__main__":
    sys.exit(main())
