"""Heavy-tail datum under the small-data criterion against its super-solution."""

import sys

from _common import finish, parser

from logheat.experiments import smalldata_validation


def main():
    p = parser(__doc__)
    p.add_argument("--m-infinity", type=float, default=1.01)
    p.add_argument("--tau", type=float, default=1.0)
    args = p.parse_args()
    rep = smalldata_validation(args.m_infinity, tau=args.tau)
    c = rep.outcomes["criterion"]
    print(f"  tau={c['tau']:.6f} psi_star={c['psi_star']:.6f} window={rep.outcomes['sup_window']}")
    return finish(rep, args.out)


if __name__ == "__main__":
    sys.exit(main())
