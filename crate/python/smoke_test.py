"""Smoke test for the `loewner` Python module.

Build the extension first:

    cargo build -p loewner-py --release --features extension-module

The script copies target/release/libloewner.so to a temporary directory as
loewner.so and imports it from there, unless `loewner` is already importable.
"""

import cmath
import math
import os
import shutil
import sys
import tempfile

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def import_loewner():
    try:
        import loewner  # noqa: F401

        return loewner
    except ImportError:
        pass
    for name in ("libloewner.so", "libloewner.dylib", "loewner.dll"):
        built = os.path.join(ROOT, "target", "release", name)
        if os.path.exists(built):
            break
    else:
        sys.exit("build the extension first: cargo build -p loewner-py --release --features extension-module")
    tmp = tempfile.mkdtemp()
    ext = ".pyd" if built.endswith(".dll") else ".so"
    shutil.copy(built, os.path.join(tmp, "loewner" + ext))
    sys.path.insert(0, tmp)
    import loewner

    return loewner


def close(a, b, tol):
    assert abs(a - b) <= tol, f"{a} vs {b} (tol {tol})"


def main():
    lw = import_loewner()
    cfg = lw.SolverConfig(dt=1e-5)

    # half circle: explicit solution x = 3/2 - sqrt(1 - 8t)/2 from x0 = 1
    circle = lw.DrivingTerm.half_circle(0.125 - 1e-4)
    out = lw.advance_bwr(1.0, circle, circle.horizon, cfg, record=True)
    assert out.status == "alive"
    worst = max(abs(x - (1.5 - 0.5 * math.sqrt(1 - 8 * t))) for t, x in out.trajectory)
    assert worst < 1e-6, worst

    # the catching family with c = 4 catches x0 = 2 at t = 1
    out = lw.advance_bwr(2.0, lw.DrivingTerm.catching_family(4.0), 1.0)
    assert out.status == "caught"
    close(out.t, 1.0, 1e-4)

    # complex flows and slit maps
    zero = lw.DrivingTerm.constant(0.0, 1.0)
    z, swallowed = lw.advance_bw(1j, zero, 0.5)
    assert swallowed is not None and abs(swallowed - 0.25) < 1e-6
    close(lw.advance_fw(1j * math.sqrt(2), zero, 0.5), 2j, 1e-8)
    w = lw.vertical_slit_map(0.3 + 0.7j, 0.1, 0.2)
    close(lw.vertical_slit_inverse(w, 0.1, 0.2), 0.3 + 0.7j, 1e-12)

    # traces
    tr = lw.compose_trace(circle, 2000)
    assert len(tr) == 2001
    assert tr.max_circle_deviation(0.5, 0.5) < 1e-2
    slit = lw.compose_trace(zero, 100)
    assert slit.diagnostics()["simple_plausible"]
    close(lw.tip_by_flow(zero, 1.0, 1e-4), 2j, 1e-2)

    # hitting times and welding
    long_zero = lw.DrivingTerm.constant(0.0, 10.0)
    close(lw.hitting_time(2.0, long_zero).t_hit, 1.0, 1e-8)
    pair = lw.welding_point(1.0, long_zero)
    close(pair.phi_x, -1.0, 1e-8)
    lo, hi, distortion, rows = lw.quasisymmetry_scan(lw.DrivingTerm.sqrt_t(2.0, 0.25), levels=3)
    assert 0 < lo <= hi and distortion >= 1 and len(rows) == 16
    assert lw.ratio_check(long_zero, -1.0, -2.0) > 1.0
    m, passed = lw.quasislit_conditions(long_zero, cap=10.0, levels=2)
    close(m, 1.0, 1e-8)
    assert passed

    # recursions
    assert lw.h_n(2.0, 1) == 0.0 and lw.h_n(2.0, 2) is None
    close(lw.x_n(10), 4 * math.cos(math.pi / 12), 1e-10)
    eps, index, _ = lw.epsilon_bound(3.9)
    assert eps > 0 and index == 13

    rows = lw.threshold_sweep([3.5, 3.9, 4.5])
    assert [r[1] for r in rows] == ["alive", "alive", "caught"]
    assert rows[1][2] > eps

    # errors map to Python exceptions
    try:
        lw.welding_point(1.0, lw.DrivingTerm.catching_family(4.0))
    except ValueError:
        pass
    else:
        raise AssertionError("norm 4 accepted")
    try:
        lw.advance_bwr(1.0, lw.DrivingTerm.catching_family(3.0), 1.0, lw.SolverConfig(max_steps=5))
    except lw.NumericalError:
        pass
    else:
        raise AssertionError("step limit not reported")

    d = lw.DrivingTerm.brownian(2.0, seed=5)
    assert d.sample_uniform(10) == lw.DrivingTerm.brownian(2.0, seed=5).sample_uniform(10)
    assert abs(d.rescale(2.0).horizon - 0.25) < 1e-15
    assert not cmath.isnan(complex(d(0.5)))
    print("python smoke test passed")


if __name__ == "__main__":
    main()
