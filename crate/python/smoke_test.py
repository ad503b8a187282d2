"""Smoke test for the keg extension module.

Build first:  pip install --no-build-isolation -e crates/py
Run:          python python/smoke_test.py
"""

import json
import os
import sys

import keg

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def path_of_six():
    # two players, vertices 0..6 on a path
    return keg.Instance(["P1", "P2"], [0, 1, 1, 0, 0, 0, 1], [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6)])


def main():
    inst = path_of_six()
    assert inst.mode == "cardinality"
    assert len(keg.max_matching(inst)) == 3
    assert keg.count_matchings(inst) == "4"

    draws = keg.sample_maximum_matchings(inst, 200, seed=1)
    assert all(len(m) == 3 for m in draws)
    assert len({tuple(m) for m in draws}) == 4

    report = keg.verify(inst, [(0, 1), (3, 4), (5, 6)])
    assert report["is_ne"] is False
    assert report["certificate"]["player"] == "P2"

    swe = keg.social_welfare_equilibrium(inst)
    assert len(swe) == 3
    assert keg.verify(inst, swe, ia="card")["is_ne"]

    weighted_path = keg.Instance(["P1", "P2"], [0, 1, 0, 1], [(0, 1), (1, 2), (2, 3)]).weighted(
        [("1", "5"), ("1", "10"), ("1", "5")]
    )
    best = keg.k_best(weighted_path, 3)
    assert best[0] == ("12", [(0, 1), (2, 3)])
    assert [v for v, _ in best] == ["12", "11", "6"]
    assert keg.ia_decision(weighted_path, [], ia="weighted") == [(0, 1), (2, 3)]

    back = keg.Instance.from_json(weighted_path.to_json())
    assert back.to_json() == weighted_path.to_json()

    dist = os.path.join(ROOT, "config", "distribution.json")
    gen = keg.generate(dist, 14, 2009, players=["ON", "BCYT", "AB"], seed=7)
    assert gen.n_vertices == 14
    assert sorted(gen.players) == ["AB", "BCYT", "ON"]
    assert json.loads(gen.to_json())["mode"] == "cardinality"

    csv = keg.run_experiments([gen], budget=50, seed=1)
    header = csv.splitlines()[0]
    assert header.startswith("year,|V|,ins,|E|,|M|_max,#|M|_max,%#-NE"), header
    assert csv == keg.run_experiments([gen], budget=50, seed=1)

    try:
        keg.generate(dist, 10, 2009, players=["XX"])
    except KeyError:
        pass
    else:
        raise AssertionError("unknown province accepted")

    print("python smoke test: ok")


if __name__ == "__main__":
    sys.exit(main())
