import math

import pytest

import aoisched as ao


def test_model_basics():
    m = ao.make_params(5, 0.5, 200)
    assert m.k == 5 and m.delta_max == 200
    assert ao.default_delta_max(5, 0.5) == 300
    assert ao.count_states(ao.make_params(1, 0.5, 2)) == 3
    assert [tuple(s) for s in ao.enumerate_states(ao.make_params(1, 0.5, 2))] == [(1, 0, 0), (2, 0, 0), (2, 1, 0)]
    dist = dict((tuple(s), p) for s, p in ao.transition((10, 4, 4), ao.Action.CONTINUE, m))
    assert dist == {(5, 0, 0): 0.5, (11, 5, 4): 0.5}
    with pytest.raises(ValueError):
        ao.make_params(5, 0.5, 9)
    with pytest.raises(ValueError):
        ao.transition((10, 6, 1), ao.Action.CONTINUE, m)


def test_solve_verify_evaluate():
    m = ao.make_params(2, 0.5)
    r = ao.solve(m, structured=True)
    assert r.report.converged
    g = r.report.average_cost
    assert g <= ao.persistent_avg_aoi(2, 0.5) + 1e-9
    assert abs(ao.evaluate_policy_exact(r.policy) - g) < 1e-6
    values = r.values.to_numpy()
    actions = r.policy.to_numpy()
    assert len(values) == len(actions) == ao.count_states(m)
    assert r.policy[(10, 0, 0)] == ao.Action.RESTART
    reports = ao.check_value_structure(r.values) + ao.check_policy_structure(r.policy)
    assert len(reports) == 12
    assert all(rep["passed"] or rep["informational"] for rep in reports)


def test_deterministic_anchor():
    r = ao.solve(ao.make_params(1, 1.0))
    assert math.isclose(r.report.average_cost, 1.0, abs_tol=1e-9)


def test_discounted_geometric_series():
    r = ao.solve(ao.make_params(1, 1.0), alpha=0.99, tol=1e-10)
    assert math.isclose(r.values[(1, 0, 0)], 100.0, rel_tol=1e-9)
    assert r.report.average_cost is None


def test_thresholds_round_trip():
    m = ao.make_params(3, 0.4)
    pi = ao.solve(m).policy
    taus = ao.extract_thresholds(pi)
    assert all(0 <= tau <= 3 for tau in taus.values())
    assert ao.threshold_policy(taus, m) == pi
    broken = ao.persistent_policy(m)
    broken[(10, 4, 1)] = ao.Action.RESTART
    with pytest.raises(ao._core.StructureError):
        ao.extract_thresholds(broken)


def test_simulate_and_trace():
    m = ao.make_params(1, 1.0)
    res = ao.simulate("persistent", m, horizon=1000, seeds=[1, 2])
    assert res["mean_aoi"] == 1.0 and res["stderr"] == 0.0
    rows = ao.trace("persistent", ao.make_params(3, 1.0), 6, seed=1)
    assert [r[0] for r in rows if r[3] == 2 and r[5] == "success"] == [3, 6]

    m = ao.make_params(2, 0.5)
    pi = ao.solve(m).policy
    a = ao.simulate(pi, m, horizon=20000, seeds=[4])
    b = ao.simulate(ao.extract_thresholds(pi), m, horizon=20000, seeds=[4])
    assert a["mean_aoi"] == b["mean_aoi"]
    assert a["policy"] == "optimal" and b["policy"] == "threshold"


def test_document_round_trip(tmp_path):
    r = ao.solve(ao.make_params(2, 0.5))
    first = tmp_path / "a.json"
    second = tmp_path / "b.json"
    ao.save_policy_document(r, first)
    back = ao.load_policy_document(first)
    ao.save_policy_document(back, second)
    assert first.read_bytes() == second.read_bytes()
    assert back.policy == r.policy
    (tmp_path / "bad.json").write_text("{}")
    with pytest.raises(ValueError):
        ao.load_policy_document(tmp_path / "bad.json")
