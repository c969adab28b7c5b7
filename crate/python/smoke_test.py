"""Smoke test for the colehopf_py extension module.

Build and install first:  pip install --no-build-isolation ./crates/python
"""

import math
import os
import tempfile

import colehopf_py as ch


def close(a, b, tol):
    return all(abs(x - y) <= tol for x, y in zip(a, b))


def main():
    grid = ch.Grid.periodic_1d(256, 0.0, 2 * math.pi)
    xs = grid.coordinates(0)
    params = ch.FluidParams(0.1)
    v0 = ch.VectorField(grid, [[math.sin(x) for x in xs]])

    psi = ch.initial_psi(v0, params)
    assert psi.min() > 0.0 and abs(psi.max() - 1.0) < 1e-12
    back = ch.psi_to_velocity(psi, params)
    assert (back - v0).max_abs() < 1e-3

    cfg = ch.MappingConfig(params, grid, window=0.1, substeps=8)
    report = ch.march(v0, 0.5, cfg)
    assert report.energy[-1] < report.energy[0]
    t, _, v = report.snapshots[-1]
    exact = ch.burgers_exact(0.1, ch.ScalarField(grid, [math.sin(x) for x in xs]), t)
    gap = (v - exact).max_abs()
    assert gap < 1e-2, gap

    cfg.uniform_reaction(5.0)
    cfg.window = 1.0
    cfg.substeps = 2
    try:
        ch.fixed_point_solve(psi, 1.0, cfg)
    except ch.NotConvergedError as e:
        kind, _, _ = ch.classify(e.args[1], cfg.fp_tolerance)
        print("strong reaction:", kind)
    else:
        raise AssertionError("expected NotConvergedError")

    line = ch.Grid.open_1d(801, -20.0, 20.0)
    a = ch.gaussian_free_packet(line, 0.0, 1.0, 1.0, 0.0)
    b = ch.gaussian_free_packet(line, 0.0, 1.0, 1.0, 0.01)
    assert ch.continuity_residual(a, b, 0.01) < 2.0 * (0.05**2 + 0.01**2)
    assert min(a.density().values) >= 0.0
    assert close(a.with_phase(1.3).density().values, a.density().values, 1e-14)

    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "v.snap")
        ch.write_snapshot(path, v, time=t)
        t2, v2 = ch.read_snapshot(path, vector=True)
        assert t2 == t and v2.components == v.components

    try:
        ch.Grid.periodic_1d(0, 0.0, 1.0)
    except ch.ColeHopfError:
        pass
    else:
        raise AssertionError("expected ColeHopfError")

    print(f"march energy {report.energy[0]:.6f} -> {report.energy[-1]:.6f}, gap to exact {gap:.2e}")
    print("ok")


if __name__ == "__main__":
    main()
