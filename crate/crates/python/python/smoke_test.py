"""Smoke test for the redmix_py extension module.

Build first, e.g. `maturin develop --release` in crates/python, then run
`python python/smoke_test.py`.
"""

import math
import tempfile

import redmix_py as rm


def main():
    lab = rm.Lab(overrides=["seed=3"])
    assert lab.n_modes == 64
    assert "[cgl]" in lab.resolved_config()

    u0 = rm.State(64, [(0, 0.5 + 0.1j), (2, -0.2j)])
    assert abs(u0.norm() - math.sqrt(0.26 + 0.04)) < 1e-14
    assert u0.get(2) == -0.2j

    path = lab.simulate(u0, 0, 5)
    assert len(path) == 6
    assert path[0].distance(u0) == 0.0
    assert path[1].distance(lab.shift(u0, 0, 0)) == 0.0

    u = lab.burn_in(lab.zeros(), 0, 10)
    d = lab.linearized(u, 0, 0)
    assert len(d) == 32 and len(d[0]) == 6 * 2 * 3
    assert lab.tangent(u, 0, 0).norm() > 0.0

    v = u.plus(5e-3, lab.random_direction(1))
    records = lab.couple(u, v, 0, 20)
    assert records[-1]["delta"] < 1e-12, records[-1]
    assert {r["branch"] for r in records} <= {"independent", "homological", "trivial"}
    same = lab.couple(u, u, 0, 5)
    assert [r["branch"] for r in same] == ["trivial"]

    far = lab.with_policy(delta0=1e-6)
    _, _, rec = far.couple_step(u, v, 0, 0)
    assert rec["branch"] == "independent"

    report = rm.noise_check(lab, paths=500, donsker_n=64, donsker_samples=500)
    assert report["orthonormality_defect"] <= 1e-12
    assert report["bound_violations"] == 0

    zs = lab.zero_stability([rm.State(64, [(0, 1e-3)])], 20, 40)
    assert abs(zs["rates"][0] + 0.1) < 0.01

    with tempfile.TemporaryDirectory() as out:
        assert rm.run_cli(["simulate", "simulate.horizon=2", f"out_dir={out}"]) == 0
    assert rm.run_cli(["simulate", "cgl.viscosity=1"]) == 2

    try:
        rm.Lab(overrides=["grid.dt_log2=3"])
    except ValueError:
        pass
    else:
        raise AssertionError("invalid time step accepted")

    print("redmix_py smoke test passed")


if __name__ == "__main__":
    main()
