import numpy as np
import pytest

from repower.mtp import ProblemSpec
from repower.replication import unweighted_pos_closed_form
from repower.simlab import (FAMILIES, ScenarioSpec, fwer_check, get_family,
                            run_family_scenario, run_scenario, sweep_curve,
                            sweep_heatmap)


def _summary_key(s):
    return (s.cross_tables.tobytes(), s.n_unconverged,
            tuple(e.value for e in s.mpos["weighted"]))


def test_scenario_spec_validation():
    with pytest.raises(ValueError):
        ScenarioSpec(theta1=(0.0,), alpha=0.05, reps=0, seed=1)
    with pytest.raises(ValueError):
        ScenarioSpec(theta1=(0.0,), alpha=1.5, reps=10, seed=1)
    with pytest.raises(ValueError):
        ScenarioSpec(theta1=(0.0, 1.0), theta2=(1.0,), alpha=0.05, reps=10,
                     seed=1)
    with pytest.raises(ValueError):
        ScenarioSpec(theta1=(0.0,), alpha=0.05, reps=10, seed=1,
                     methods=("bogus",))


def test_deterministic_across_thread_counts(monkeypatch):
    s = ScenarioSpec(theta1=(0.0, 2.5), alpha=0.05, reps=50_000, seed=7)
    monkeypatch.setenv("REPOWER_THREADS", "1")
    a = run_scenario(s)
    monkeypatch.setenv("REPOWER_THREADS", "4")
    b = run_scenario(s)
    assert _summary_key(a) == _summary_key(b)


def test_deterministic_replay_same_seed():
    s = ScenarioSpec(theta1=(1.0, 2.0), alpha=0.05, reps=10_000, seed=3)
    assert _summary_key(run_scenario(s)) == _summary_key(run_scenario(s))


def test_different_seeds_differ():
    a = run_scenario(ScenarioSpec(theta1=(2.0,), alpha=0.05, reps=5_000,
                                  seed=1))
    b = run_scenario(ScenarioSpec(theta1=(2.0,), alpha=0.05, reps=5_000,
                                  seed=2))
    assert _summary_key(a) != _summary_key(b)


def test_se_formula_exact():
    s = ScenarioSpec(theta1=(0.0, 3.0), alpha=0.05, reps=8_000, seed=11)
    r = run_scenario(s)
    for method in ("weighted", "unweighted"):
        e = r.dpos[method]
        assert e.se == pytest.approx(
            np.sqrt(e.value * (1 - e.value) / s.reps), rel=1e-12)


def test_cross_table_marginals_match_mpos():
    s = ScenarioSpec(theta1=(1.5, 2.5), alpha=0.05, reps=20_000, seed=5)
    r = run_scenario(s)
    # cross_tables[i] rows = unweighted (0 = reject), cols = weighted
    unw_counts = r.cross_tables[:, 0, :].sum(axis=1)
    w_counts = r.cross_tables[:, :, 0].sum(axis=1)
    for i in range(2):
        assert unw_counts[i] == round(r.mpos["unweighted"][i].value * s.reps)
        assert w_counts[i] == round(r.mpos["weighted"][i].value * s.reps)
    assert r.cross_tables.sum(axis=(1, 2)) == pytest.approx(s.reps)


def test_unweighted_mpos_matches_closed_form():
    rng = np.random.default_rng(2024)
    for _ in range(20):
        m = int(rng.integers(1, 5))
        t1 = np.round(rng.uniform(0.0, 4.0, m), 2)
        t2 = np.round(rng.uniform(0.0, 4.0, m), 2)
        reps = 4_000
        s = ScenarioSpec(theta1=tuple(t1), theta2=tuple(t2), alpha=0.05,
                         reps=reps, seed=int(rng.integers(2 ** 31)))
        r = run_scenario(s)
        mpos, _ = unweighted_pos_closed_form(t1, t2,
                                             ProblemSpec(m=m, alpha=0.05))
        for i in range(m):
            est = r.mpos["unweighted"][i].value
            se = max(np.sqrt(mpos[i] * (1 - mpos[i]) / reps), 1e-4)
            assert abs(est - mpos[i]) <= 4 * se


def test_dpos_none_without_nonnull():
    s = ScenarioSpec(theta1=(0.0, 0.0), alpha=0.05, reps=2_000, seed=1)
    r = run_scenario(s)
    assert r.dpos is None


def test_fwer_bound_and_trial1_value():
    s = ScenarioSpec(theta1=(0.0, 0.0), alpha=0.05, reps=50_000, seed=42)
    fwer = fwer_check(s)
    expect = 1.0 - (1.0 - 0.025) ** 2
    for method in ("weighted", "unweighted"):
        t1 = fwer[method]["trial1"]
        assert abs(t1.value - expect) <= 3 * t1.se
        t2 = fwer[method]["trial2"]
        assert t2.value <= 0.05 + 3 * t2.se


def test_fwer_check_requires_null():
    s = ScenarioSpec(theta1=(1.0, 2.0), alpha=0.05, reps=100, seed=1)
    with pytest.raises(ValueError):
        fwer_check(s)


def test_family_registry():
    fam = get_family("zero-theta")
    assert fam.fixed_vector(3.0) == pytest.approx([0.0, 3.0])
    assert set(FAMILIES) == {
        "zero-theta", "half-theta", "equal", "swapped", "two-zeros",
        "geometric", "four-zeros", "two-zeros-three", "uniform-random"}
    with pytest.raises(ValueError):
        get_family("bogus")
    with pytest.raises(ValueError):
        get_family("uniform-random").fixed_vector(1.0)


def test_randomized_family_runs_and_redraw_flag():
    fam = get_family("uniform-random")
    a = run_family_scenario(fam, 2.0, None, None, 0.05, 2_000, 9)
    b = run_family_scenario(fam, 2.0, None, None, 0.05, 2_000, 9,
                            redraw_per_rep=False)
    assert a.reps == b.reps == 2_000
    assert _summary_key(a) != _summary_key(b)


def test_sweep_curve_shape_and_zero_point():
    base = ScenarioSpec(theta1=(0.0,), alpha=0.05, reps=4_000, seed=1)
    pts = sweep_curve("zero-theta", [0.0, 2.0], base)
    assert [p[0] for p in pts] == [0.0, 2.0]
    th0 = pts[0][1]
    # theta = 0: no non-null hypothesis, so dPoS is undefined and the
    # only activity is the alpha-driven error floor
    assert th0.dpos is None
    for method in ("weighted", "unweighted"):
        assert th0.fwer[method]["trial2"].value < 0.05 + 0.01
    assert pts[1][1].dpos is not None
    with pytest.raises(ValueError):
        sweep_curve("zero-theta", [], base)


def test_heatmap_diagonal_matches_curve():
    base = ScenarioSpec(theta1=(0.0,), alpha=0.05, reps=3_000, seed=17)
    rows = sweep_heatmap("equal", "equal", [2.0], [2.0], base)
    th, th2, cell = rows[0][0]
    assert (th, th2) == (2.0, 2.0)
    # consistent-truth heatmap cell is a plain scenario at that theta
    direct = run_family_scenario(get_family("equal"), 2.0, get_family("equal"),
                                 2.0, 0.05, 3_000, seed=1)
    assert abs(cell.dpos["weighted"].value
               - direct.dpos["weighted"].value) < 0.05
    with pytest.raises(ValueError):
        sweep_heatmap("equal", "two-zeros", [1.0], [1.0], base)
