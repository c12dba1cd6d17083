"""Smoke test for the pgeval extension module.

Build and install first, e.g. `maturin develop --release` from crates/python,
then run `python python/smoke_test.py`.
"""

import json
import math

import pgeval


def main():
    pose = pgeval.Pose(3.0, -2.0, -math.pi / 2)
    assert 0.0 <= pose.theta < 2 * math.pi
    x, y = pose.inverse().apply(*pose.apply(1.5, 4.0))
    assert abs(x - 1.5) < 1e-9 and abs(y - 4.0) < 1e-9

    a = [(0.0, 0.0), (1.0, 1.0), (2.0, 0.5), (3.0, 3.0)]
    b = [(0.0, 0.2), (2.0, 0.7), (3.0, 2.5)]
    d_fast, path = pgeval.fast_dtw(a, b)
    d_exact, _ = pgeval.dtw_exact(a, b)
    assert abs(d_fast - d_exact) < 1e-9
    assert path[0] == (0, 0) and path[-1] == (len(a) - 1, len(b) - 1)

    net = pgeval.RoadNetwork.grid_city(4, 80.0)
    print(net)
    cell = net.cell_of(40.0, 5.0)
    near = net.nearest_cell(cell)
    assert net.is_occupied(near)

    doc, planted = pgeval.synthesize(net, "on-road-path", 40.0, seed=3)
    scenarios = pgeval.ScenarioSet.from_json(doc)
    (sid,) = scenarios.ids()
    assert planted is not None
    assert pgeval.likelihood(net, planted, scenarios, sid) >= 0.99

    params = pgeval.FilterParams(n_particles=300, seed=1)
    result = pgeval.place(net, scenarios, sid, params)
    print("place:", result["termination"], "compatibility", round(result["compatibility"], 4))
    assert result["compatibility"] >= 0.9
    q = [row["q_star"] for row in result["trace"]]
    assert all(q1 >= q0 for q0, q1 in zip(q, q[1:]))

    try:
        pgeval.place(net, scenarios, "missing", params)
    except KeyError as e:
        assert sid in str(e)
    else:
        raise AssertionError("unknown id accepted")

    report = pgeval.evaluate(net, scenarios, params, reference=(1.0, 32.0))
    print(json.dumps({k: report[k] for k in ("map_name", "coverage", "land_efficiency")}))
    again = pgeval.evaluate(net, scenarios, params, reference=(1.0, 32.0))
    assert report == again

    assert abs(pgeval.land_efficiency(0.9862, 42.0, 1.0, 32.0) - 0.7514) < 1e-4
    print("smoke test ok")


if __name__ == "__main__":
    main()
