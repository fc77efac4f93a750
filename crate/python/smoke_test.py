"""Smoke test for the gn1d_py extension module.

Build and run:
    cargo build --release -p gn1d-py --features extension-module
    cp target/release/libgn1d_py.so python/gn1d_py.so
    python3 python/smoke_test.py
"""

import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import gn1d_py as gn


def main():
    grid = gn.Grid(128, 40.0)
    params = gn.Parameters(0.2, 0.5, 0.5)
    model = gn.Model(grid, params, dealias=True)

    rest = gn.State.rest(grid.n)
    dz, du = gn.nonlinear_rhs(model, rest)
    assert max(map(abs, dz + du)) == 0.0

    x = grid.coords()
    state = gn.State([0.1 * math.exp(-((xi - 20.0) ** 2) / 4.0) for xi in x], [0.0] * grid.n)
    e0 = gn.conserved_energy(model, state)
    m0 = gn.mass(model, state)
    status, steps, final, min_h = gn.run(model, state, 2.0)
    assert status == "completed", status
    assert abs(final.time - 2.0) < 1e-12
    assert abs(gn.conserved_energy(model, final) - e0) <= 1e-6 * e0
    assert abs(gn.mass(model, final) - m0) <= 1e-12
    print(f"run: {steps} steps, min h {min_h:.4f}, energy {e0:.6e}")

    sc_model, sc_state = gn.scenario("lake_at_rest")
    stepped = gn.rk4_step(sc_model, sc_state, 0.01)
    assert max(map(abs, stepped.zeta)) <= 1e-12

    try:
        gn.Parameters(2.0, 0.5, 0.5)
    except ValueError as e:
        print(f"rejected bad epsilon: {e}")
    else:
        raise AssertionError("epsilon > 1 accepted")

    results = gn.verify(1)
    for name, measured, passed in results:
        print(f"{'PASS' if passed else 'FAIL'} {name}: {measured}")
    assert all(p for _, _, p in results)
    print("smoke test ok")


if __name__ == "__main__":
    main()
