import json
import math

import numpy as np
import pytest

from logheat import experiments, io
from logheat.model import GaussianParams, Regime


def test_gaussian_validation_coarse():
    rep = experiments.gaussian_validation(GaussianParams(2.0, 1.0), 1.0, half_width=8.0,
                                          dx_list=(0.08, 0.04, 0.02), tol=1e-2)
    assert rep.passed, rep.flags
    assert 1.8 < rep.outcomes["order"] < 2.2
    assert set(rep.criteria.values()) == {"1", "3,4"}
    json.dumps(io.jsonable(rep.to_dict()))


def test_dichotomy_sweep_parallel_matches_serial():
    kw = dict(dx=0.05, t_end=4.0)
    a = experiments.dichotomy_sweep([0.5], jobs=1, **kw)
    b = experiments.dichotomy_sweep([0.5], jobs=2, **kw)
    assert a.to_dict() == b.to_dict()
    assert a.outcomes["eps=+0.5"]["regime"] == "Growth"
    assert a.outcomes["eps=-0.5"]["regime"] == "Decay"
    assert list(a.outcomes) == ["eps=-0.5", "eps=+0.5"]


@pytest.mark.parametrize("eps", [0.0, 1.0, -0.2])
def test_dichotomy_sweep_rejects_bad_eps(eps):
    with pytest.raises(ValueError):
        experiments.dichotomy_sweep([eps])


def test_small_eps_undecided_is_tolerated():
    rep = experiments.dichotomy_sweep([0.01], dx=0.05, t_end=1.0)
    for label in ("eps=-0.01", "eps=+0.01"):
        assert rep.outcomes[label]["regime"] == "Undecided"
        assert rep.flags[f"{label}:regime"]
        assert f"{label}:undecided" in rep.advisories


def test_threshold_bracket_invariant_under_small_budget():
    res, rep = experiments.threshold_bisection(max_probes=5, dx=0.1)
    assert len(res.probes) <= 5
    assert rep.flags["decay_at_M_decay"] and rep.flags["growth_at_M_growth"]
    by_m = {p["M"]: p["regime"] for p in res.probes}
    lo, hi = res.bracket
    assert by_m[lo] == Regime.DECAY.value and by_m[hi] == Regime.GROWTH.value
    assert hi - lo <= (res.M_growth - res.M_decay) / 2 ** res.iterations * (1 + 1e-12)
    assert not rep.flags["bracket_width"]  # five probes cannot reach 5%


def test_threshold_rejects_plateau_outside_bump():
    with pytest.raises(ValueError):
        experiments.threshold_bisection(half_width=2.0, plateau_L=2.5)


def test_bounded_domain_rejects_wide_support():
    with pytest.raises(ValueError):
        experiments.bounded_domain_rates(alpha=0.0, beta=4.0, half_width=3.0)


def test_kpp_rejects_tall_datum():
    with pytest.raises(ValueError):
        experiments.kpp_spreading(M=1.5)


def test_report_writes_files(tmp_path):
    rep = experiments.kpp_spreading(domain_half_width=30.0, dx=0.1, t_end=2.0)
    path = io.write_report(rep, tmp_path, "test", {"k": 1})
    payload = json.loads(path.read_text())
    assert payload["version"] == "test" and payload["config"] == {"k": 1}
    csv_path = path.parent / payload["run_files"]["defocusing"]
    assert csv_path.read_text().splitlines()[0] == "t,l1,l2,linf,energy,psi_hat,front"


def test_trajectory_csv_round_trip(tmp_path):
    rep = experiments.smalldata_validation(domain_half_width=20.0, dx=0.1, t_end=1.0)
    tr = rep.runs["heavy_tail"]
    path = io.write_trajectory_csv(tr, tmp_path / "t.csv")
    back = io.read_trajectory_csv(path, tr.lam)
    np.testing.assert_array_equal(back.times, tr.times)
    np.testing.assert_allclose(back.log_linf, tr.log_linf, rtol=1e-15, atol=1e-15)


def test_read_trajectory_recovers_saturated_sup(tmp_path):
    p = tmp_path / "t.csv"
    psi = 0.4
    t = 200.0
    p.write_text("t,l1,l2,linf,energy,psi_hat\n0,1,1,1,0,0\n%r,inf,inf,inf,-inf,%r\n" % (t, psi))
    tr = io.read_trajectory_csv(p, 1.0)
    assert tr.log_linf[1] == pytest.approx(psi * math.exp(2 * t))
