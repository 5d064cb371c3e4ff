"""Smoke test for the pybundlelab extension module.

Build with `cargo build -p bundlelab-py`, copy `target/debug/libpybundlelab.so`
to `pybundlelab.so` somewhere on PYTHONPATH, then run this script.
"""

import json
import math

import pybundlelab as bl


def main():
    p = bl.ChartPoint("stereo-N", [0.3, -0.2, 0.5])
    integ = bl.Integrator(1e-10)
    period, defect = integ.minimal_period(bl.Field("hopf"), p, 2 * math.pi)
    assert abs(period - 2 * math.pi) < 1e-8, period
    assert defect < 1e-8

    back = integ.flow(bl.Field("hopf"), p, 2 * math.pi)
    assert back.distance(p) < 1e-8

    v = bl.Field("lifted-local", e=2).eval(bl.ChartPoint("blowup-xu", [0.0, 1.0, 0.0]))
    assert v == [0.0, -4.0, 1.0], v

    assert bl.transition_degree(3, 64) == 3
    assert abs(bl.geometric_phase(1.0) - math.pi) < 1e-8
    assert bl.heis_reduce(1.5, 0.3, 0.2)[0] == 0.5

    params = bl.ThurstonParams.profile(1.0)
    delta, gap, k = params.closure_defect()
    assert gap < 1e-6 and k == 0

    circle = lambda cx: [[cx + math.cos(t), math.sin(t), 0.0] for t in (2 * math.pi * i / 64 for i in range(64))]
    assert bl.gauss_linking(circle(0.0), circle(5.0))[0] == 0

    assert "hopf-periods" in bl.list_experiments()
    report = json.loads(bl.run_experiment("transition-degree"))
    assert report["pass"] is True

    try:
        bl.run_experiment("hopf-periods", json.dumps({"tol": -1.0}))
    except ValueError:
        pass
    else:
        raise AssertionError("negative tolerance accepted")

    print("pybundlelab smoke test passed")


if __name__ == "__main__":
    main()
