import math

import pytest

import evi


def test_zero_data_stays_zero():
    out = evi.solve_state(n_cells=16, n_steps=16)
    assert len(out["times"]) == 17
    assert all(v == 0.0 for state in out["states"] for v in state)
    assert all(v == 0.0 for g in out["subgradients"] for v in g)


def test_cosine_profile_decays():
    out = evi.solve_state(n_cells=32, n_steps=32, y0="cospix", horizon=0.5)
    first = evi.h_inner(out["states"][0], out["states"][0], n_cells=32)
    last = evi.h_inner(out["states"][-1], out["states"][-1], n_cells=32)
    assert last < first
    assert last > 0.0


def test_prox_of_constant_vector():
    tau = 0.25
    z = [1.0] * 9
    out = evi.prox(z, tau, n_cells=8)
    assert out["direct"] is True
    for y in out["y"]:
        assert y == pytest.approx(1.0 / (1.0 + tau), rel=1e-12)
    for g, y in zip(out["g"], out["y"]):
        assert g == pytest.approx((1.0 - y) / tau, rel=1e-12)


def test_quadrature_helpers():
    nodes = evi.grid_nodes(4, 1.0)
    assert nodes == pytest.approx([0.0, 0.25, 0.5, 0.75, 1.0])
    assert evi.h_inner([1.0] * 5, [1.0] * 5, n_cells=4) == pytest.approx(1.0)
    assert evi.v_norm([0.0] * 5, 2.0, n_cells=4) == 0.0


def test_point_box_optimize_takes_no_steps():
    out = evi.optimize(
        command="optimize",
        n_cells=8,
        n_steps=8,
        n_intervals=2,
        box_lower=0.5,
        box_upper=0.5,
        y_target="bump",
    )
    assert len(out["log"]) == 1
    assert out["log"][0]["pg_norm"] == 0.0
    assert all(v == 0.5 for interval in out["control"] for v in interval)


def test_descent_log_is_nonincreasing():
    out = evi.optimize(
        command="optimize",
        n_cells=8,
        n_steps=8,
        n_intervals=2,
        y_target="bump",
        mu=0.1,
        max_iters=10,
    )
    js = [row["j"] for row in out["log"]]
    assert all(b <= a for a, b in zip(js, js[1:]))
    assert out["j_star"] <= js[0]


def test_convergence_rates_near_first_order():
    out = evi.convergence(
        n_cells=8, n_steps=10, halvings=3, horizon=0.1, y0="cospix"
    )
    assert math.isnan(out["rates"][0])
    for rate in out["rates"][1:]:
        assert 0.7 <= rate <= 1.3


def test_run_writes_reproducible_artifacts(tmp_path):
    cfg = dict(n_cells=8, n_steps=8, y0="bump", f="const:0.25", seed=3)
    code, summary = evi.run(out_dir=str(tmp_path / "a"), **cfg)
    assert code == 0
    assert "wrote" in summary
    code, _ = evi.run(out_dir=str(tmp_path / "b"), **cfg)
    assert code == 0
    for name in ("trajectory.csv", "diagnostics.csv"):
        a = (tmp_path / "a" / name).read_bytes()
        b = (tmp_path / "b" / name).read_bytes()
        assert a == b
        assert a


def test_invalid_configs_are_rejected():
    with pytest.raises(RuntimeError):
        evi.solve_state(whatever=1)
    with pytest.raises(ValueError):
        evi.solve_state(kernel="mystery")
    code, _ = evi.run(command="optimize", mu=-1.0, out_dir="unused")
    assert code == 2
