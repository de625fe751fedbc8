"""Smoke tests for the python bindings."""

import math
import os
import sys
import tempfile

import rope


def approx(a, b, tol=1e-9):
    return abs(a - b) <= tol


def test_metrics():
    assert approx(rope.normalized_strength(-45.0, -80.0, -10.0), 0.5)
    assert approx(rope.link_connectivity(0.5, 1.0), 0.5)
    assert approx(rope.link_connectivity(5.0, 1.0), 1.0)
    k = rope.RelativeKinematics(100.0, 5.0, math.pi, 300.0)
    assert approx(rope.link_duration(k), (300.0 - 100.0) / 5.0)


def test_routing():
    g = rope.Graph(4)
    g.add_edge(0, 1, 0.9, 1.0)
    g.add_edge(1, 3, 0.9, 1.0)
    g.add_edge(0, 2, 0.5, 1.0)
    g.add_edge(2, 3, 0.5, 1.0)
    params = rope.RoutingParams()
    out = rope.tora_top3(g, 0, 3, params)
    assert len(out) == 2
    assert list(out[0].nodes) == [0, 1, 3]
    assert out[0].rank == rope.PathRank.J1
    assert out[0].metrics.strength >= out[1].metrics.strength
    direct = rope.baseline_car(g, 0, 3)
    assert direct is not None


def test_scenario_roundtrip():
    world = rope.generate_map(2, 2, 160.0, 14.0, 1, 7)
    assert world.building_count() == 4
    assert world.bs_count() == 1
    assert rope.total_road_km(world) > 0.0
    trace = rope.generate_traces(world, 400.0, 5.0, 1.0, 3)
    assert trace.tick_count() == 6
    with tempfile.TemporaryDirectory() as tmp:
        map_path = os.path.join(tmp, "map.csv")
        rope.export_map(world, map_path)
        back = rope.import_map(map_path)
        assert back.road_count() == world.road_count()
        trace_path = os.path.join(tmp, "trace.csv")
        rope.export_traces(trace, trace_path)
        tback = rope.import_traces(trace_path)
        assert tback.tick_count() == trace.tick_count()


def test_training_and_inference():
    world = rope.generate_map(2, 2, 160.0, 14.0, 1, 7)
    trace = rope.generate_traces(world, 600.0, 8.0, 1.0, 3)
    config = rope.CycleConfig()
    db = rope.build_link_db(world, trace, 3, config)
    assert len(db) > 0
    hyper = rope.TrainHyper()
    hyper.epochs = 2
    hyper.hidden = 6
    model = rope.train_capnet(db, rope.LinkType.V2I, hyper)
    feats = rope.FeatureVector()
    feats.x = [100.0, 100.0, 1.6, 10.0]
    feats.c = [0.0, 1.0, 0.0]
    dist = rope.infer_strength(model, feats)
    assert dist.var > 0.0
    assert math.isfinite(dist.mu)


def main():
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_")]
    for t in tests:
        t()
        print(f"{t.__name__}: ok")
    print(f"{len(tests)} smoke tests passed")


if __name__ == "__main__":
    main()
