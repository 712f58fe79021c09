"""Smoke test for the flexpool extension module.

Build and install first, for example:

    pip install maturin
    maturin develop --release -m crates/python/Cargo.toml

then run ``python python/smoke_test.py``.
"""

import json
import pathlib
from fractions import Fraction

import flexpool

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures"


def load(name):
    return flexpool.Instance.from_json((FIXTURES / name).read_text())


def main():
    fig4 = load("fig4.json")
    assert fig4.is_feasible()
    assert flexpool.redundant_edges(fig4) == [(1, 3), (1, 5), (2, 4)]
    dec = flexpool.decompose(fig4)
    assert dec["erp"] == 3
    assert [c["demands"] for c in dec["components"]] == [[1], [2, 3], [4, 5]]

    inst = flexpool.Instance([Fraction(1, 3), "2/3"], [1], [(1, 1), (2, 1)])
    assert inst.demand == [Fraction(1, 3), Fraction(2, 3)]
    assert flexpool.Instance.from_json(inst.to_json()) == inst

    design = flexpool.design_flexibility([1, 1], [1, 1], 1)
    assert design["edge_count"] == 4 == flexpool.min_edges([1, 1], [1, 1], 1)

    left = load("fig6_left.json")
    right = left.with_edge((2, 1))
    assert flexpool.crp_gap(left)["value"] == Fraction(1, 10)
    assert flexpool.crp_gap(right)["value"] == Fraction(1, 10)
    assert flexpool.alt_crp_gap(right)["value"] == Fraction(1, 20)

    fig7 = load("fig7.json")
    assert flexpool.erp_trajectory(fig7, [(4, 3), (2, 1)]) == [3, 2]
    assert flexpool.erp_trajectory(fig7, [(2, 3), (4, 1)]) == [4, 1]
    assert flexpool.best_single_edge(fig7)["new_erp"] == 3

    plan = flexpool.plan(9, 11)
    assert plan["value"] == 61

    rows = flexpool.simulate(load("single_queue.json"), [0.1], horizon=200_000, seed=3, heights=[3])
    assert 0.7 < rows[0]["ratio"] < 1.3
    again = flexpool.simulate(load("single_queue.json"), [0.1], horizon=200_000, seed=3, heights=[3])
    assert rows == again

    code, out, _ = flexpool.run_cli(["decompose", str(FIXTURES / "fig4.json")])
    assert code == 0 and json.loads(out)["schema_version"] == flexpool.SCHEMA_VERSION
    code, _, err = flexpool.run_cli(["decompose", str(FIXTURES / "unbalanced.json")])
    assert code == 1 and json.loads(err)["error"]["kind"] == "UnbalancedTotals"

    try:
        flexpool.Instance([1, 2], [1, 1])
    except flexpool.FlexpoolError as e:
        assert "UnbalancedTotals" in str(e)
    else:
        raise AssertionError("unbalanced instance accepted")
    try:
        flexpool.Instance([0.5], [0.5])
    except ValueError:
        pass
    else:
        raise AssertionError("float rate accepted")

    print("python smoke test: ok")


if __name__ == "__main__":
    main()
