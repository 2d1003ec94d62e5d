import csv
import io

import numpy as np
import pytest

import khk


def test_catalog_kinds():
    assert set(khk.kinds()) == {
        "general_clebsch",
        "first_clebsch",
        "second_clebsch",
        "kirchhoff",
        "lagrange",
        "planar_family",
    }


def test_step_is_reversible():
    sys = khk.make_system("first_clebsch", omega=[1.0, 2.0, 3.0])
    x = np.array([0.1, -0.2, 0.3, 0.4, 0.1, -0.5])
    xt, delta = sys.step(x, 0.05)
    back, _ = sys.step(xt, -0.05)
    assert delta == pytest.approx(sys.delta(x, 0.05))
    np.testing.assert_allclose(back, x, atol=1e-13)


def test_integrals_conserved_on_orbit():
    sys = khk.make_system("lagrange", alpha=2.0, gamma=1.0)
    states, stopped = khk.orbit(sys, [0.1, 0.2, 0.3, 0.4, 0.5, 0.6], 0.05, 200)
    assert not stopped
    assert states.shape == (201, 6)
    i0 = [sys.conserved("I0", s, 0.05) for s in states]
    assert max(abs(v - i0[0]) for v in i0) < 1e-10 * (1 + abs(i0[0]))
    # m3 is carried over exactly
    assert np.all(states[:, 2] == states[0, 2])


def test_integral_columns_match_descriptor():
    sys = khk.make_system("kirchhoff")
    values = sys.integrals_at([0.2, 0.1, 0.3, 0.5, -0.4, 0.2], 0.1)
    expected = sys.integrals + ["density_" + d for d in sys.densities]
    assert list(values) == expected


def test_verify_suite_passes_planar():
    reports = khk.verify(khk.make_system("planar_family"), trials=50, steps=200)
    assert reports and all(r["passed"] for r in reports)


def test_hk_scan_kirchhoff():
    scan = khk.hk_scan(khk.make_system("kirchhoff"), [0.3, -0.2, 0.4, 0.5, 0.1, -0.3], 0.05, 3)
    assert [s["null_dim"] for s in scan["scans"]] == [1, 1, 1]


def test_config_round_trip_and_errors():
    canonical = khk.canonical_config(
        {"system": "lagrange", "alpha": 2, "gamma": 1, "x0": [0, 0, 1, 0, 1, 0]}
    )
    assert canonical["system"] == {"kind": "lagrange", "params": {"alpha": 2.0, "gamma": 1.0}}
    assert canonical["eps"] == 0.05 and canonical["steps"] == 1000 and canonical["seed"] == 42
    assert khk.canonical_config(canonical) == canonical
    with pytest.raises(khk.ConfigError, match="omega"):
        khk.canonical_config({"system": "first_clebsch"})


def test_simulate_csv_header_only_for_zero_steps():
    text = khk.simulate_csv({"system": "lagrange", "alpha": 2, "gamma": 1, "steps": 0})
    rows = list(csv.reader(io.StringIO(text)))
    assert rows == [["step", "x1", "x2", "x3", "x4", "x5", "x6", "Delta",
                     "I0", "J0", "r", "s", "R", "S", "density_R", "density_S"]]


def test_pole_raises():
    sys = khk.make_system("first_clebsch")
    d = np.array([-0.537, 0.581, 0.365, 0.294, 0.028, 0.547])
    lo, hi = 1.0, 2.0
    assert sys.delta(lo * d, 1.0) * sys.delta(hi * d, 1.0) < 0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if sys.delta(lo * d, 1.0) * sys.delta(mid * d, 1.0) <= 0:
            hi = mid
        else:
            lo = mid
    with pytest.raises(khk.SingularStep):
        sys.step(lo * d, 1.0)
