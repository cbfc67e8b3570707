"""Double-exponential L2 rates on a bounded interval with Dirichlet data."""

import sys

from _common import finish, parser

from logheat.experiments import bounded_domain_rates


def main():
    p = parser(__doc__)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--beta", type=float, default=8.0)
    args = p.parse_args()
    rep = bounded_domain_rates(args.alpha, args.beta)
    for label in ("decay", "growth"):
        o = rep.outcomes[label]
        print(f"  {label}: M={o['M']:.6g} slope={o['slope']:.4f} rms={o['fit_rms_residual']:.2e}")
    return finish(rep, args.out)


if __name__ == "__main__":
    sys.exit(main())
