import math

import numpy as np
import pytest

import pbos


def test_game_list():
    assert set(pbos.game_names()) == {
        "tandem", "ipd", "matching_pennies", "ultimatum", "stackelberg", "stag_hunt"}


def test_tandem_losses_and_derivatives():
    l1, l2 = pbos.losses("tandem", np.array([0.25, 0.25]))
    assert l1 == pytest.approx(-0.25)
    assert l2 == pytest.approx(-0.25)
    d = pbos.derivatives("tandem", np.array([1.0, 1.0]))
    assert d["L1"]["grad1"][0] == pytest.approx(2.0)
    assert d["L2"]["h21"].shape == (1, 1)


def test_selfplay_run_is_seeded():
    a = pbos.run("stag_hunt", "pbos", steps=300, seed=3)
    b = pbos.run("stag_hunt", "pbos", steps=300, seed=3)
    assert np.array_equal(a["L1"], b["L1"])
    assert a["theta"].shape == (300, 2)
    assert not a["diverged"]


def test_cpbos_tandem_reaches_cooperative_optimum():
    r = pbos.run("tandem", "cpbos", seed=0)
    assert sum(r["final_losses"]) == pytest.approx(-0.5, abs=0.02)
    assert r["final_c"] == (1.0, 1.0)


def test_crossplay_and_overrides():
    r = pbos.run("matching_pennies", "pbos", opponent="cgd", steps=200,
                 config={"opponent_learner": {"alpha": 0.05}})
    assert r["final_c"][1] == 0.0
    assert all(math.isfinite(x) for x in r["final_losses"])


def test_bad_inputs_raise():
    with pytest.raises(ValueError):
        pbos.run("chess", "pbos")
    with pytest.raises(ValueError):
        pbos.run("tandem", "pbos", config={"unknown": 1})


def test_nash_and_benchmark():
    pts = pbos.enumerate_nash([[4, -10], [3, 1]], [[4, 3], [-10, 1]])
    assert [p["kind"] for p in pts].count("pure") == 2
    s = pbos.benchmark(n_games=4, steps=100, seed=2, threads=1)
    assert s["n_games"] == 4
    assert "pbos" in s["rules"]


def test_verify_reports_every_check():
    names = [name for name, _, _ in pbos.verify()]
    assert "derivatives match central differences" in names
