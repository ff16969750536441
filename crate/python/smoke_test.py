"""Smoke test for the qpolis_py extension.

Build and install first:

    pip install --no-build-isolation ./crates/py
"""

import json

import qpolis_py as q

VEE = json.dumps({"points": ["a", "b", "c"], "opens": [["a"], ["b"]]})
COLLAPSE = json.dumps(
    {
        "source": {"points": ["a", "b", "c"], "opens": [["a"], ["b"]]},
        "target": {"points": ["bot", "top"], "opens": [["top"]]},
        "graph": {"a": "top", "b": "top", "c": "bot"},
    }
)
THREE = json.dumps(
    {
        "carrier": ["top", "a", "b"],
        "leq": [["a", "top"], ["b", "top"]],
        "covers": [
            {"U": "top", "V": ["a", "b"]},
            {"U": "a", "V": ["a"]},
            {"U": "b", "V": ["b"]},
        ],
    }
)


def test_spaces():
    generic = {tuple(f): p for f, p in q.sober_witness(VEE)}
    assert generic[("a", "c")] == "a"
    assert ("c", "a") in q.specialization(VEE)
    assert q.is_baire_measurable(VEE, ["c"])
    lower = json.loads(q.lower_powerspace(VEE))
    assert len(lower["points"]) == 5
    assert q.powerspace_check(VEE)


def test_maps():
    assert q.open_surjection_check(COLLAPSE)
    assert q.is_essential(COLLAPSE)


def test_conversions():
    copres = q.convert(VEE, "finite-space", "copresentation")
    back = json.loads(q.convert(copres, "copresentation", "finite-space"))
    assert len(back["points"]) == 3
    filters = json.loads(q.convert(THREE, "posite", "finite-space"))
    assert filters["points"] == ["{top,a}", "{top,b}"]


def test_posites():
    assert q.posite_axioms(THREE)
    assert q.prime_filters(THREE) == [["top", "a"], ["top", "b"]]
    assert q.generic_filter(THREE, "top", ["top", "b"]) == ["top", "b"]


def test_reals():
    report = json.loads(q.check_real("sqrt2", 20))
    assert report["violated"] == 0
    assert q.separate("1/3", "1/2")[0] == "2/5"


def test_games():
    for seed in range(5):
        assert q.play_game(VEE, "finite", f"random:{seed}") == ("ii_wins", "ii_wins")


def test_suites():
    report = json.loads(q.run_suite("oracle", seed=3, max_size=3))
    assert all(a["passed"] for a in report["assertions"])
    assert report == json.loads(q.run_suite("oracle", seed=3, max_size=3))


def test_errors():
    for bad in [
        lambda: q.convert(VEE, "finite-space", "yaml"),
        lambda: q.run_suite("nope"),
        lambda: q.sober_witness("{}"),
        lambda: q.generic_filter(THREE, "top", ["top"]),
    ]:
        try:
            bad()
        except q.QpolisError:
            continue
        raise AssertionError("expected QpolisError")


if __name__ == "__main__":
    tests = [(n, f) for n, f in sorted(globals().items()) if n.startswith("test_")]
    for name, f in tests:
        f()
        print(f"ok {name}")
    print(f"{len(tests)} passed")
