"""Solver vs closed-form Gaussian solutions under grid refinement."""

import math
import sys

from _common import finish, parser

from logheat.experiments import gaussian_validation
from logheat.model import GaussianParams

CASES = [(2.0, 1.0), (0.5, 2.0), (1.0, math.exp(0.5))]


def main():
    p = parser(__doc__)
    p.add_argument("--lam", type=float, default=1.0)
    args = p.parse_args()
    status = 0
    for a0, b0 in CASES:
        rep = gaussian_validation(GaussianParams(a0, b0), args.lam)
        rep.name = f"gaussian_validation_a0_{a0:g}_b0_{b0:.6g}"
        print(f"  a0={a0:g} b0={b0:.6g} order={rep.outcomes['order']:.3f}")
        status |= finish(rep, args.out)
    return status


if __name__ == "__main__":
    sys.exit(main())
