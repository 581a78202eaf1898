"""Smoke test for the threeap extension module.

Build and stage the module, then run this script:

    cargo build --release -p threeap-py --features extension-module
    cp target/release/libthreeap.so python/threeap.so
    python3 python/smoke_test.py
"""

import json
import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import threeap


def main():
    a = threeap.ResidueSet(5, [1, 2, 3, 4])
    assert a.t3() == 12
    assert threeap.count_report(a) == {"t3": 12, "trivial": 4, "combinatorial": 4}
    assert threeap.ResidueSet.from_json(a.to_json()) == a
    assert len(a.complement()) == 1
    assert threeap.t3_fast(a, a, a) == threeap.t3_naive(a, a, a) == 12

    e = threeap.generate_family("E", 1, 1)
    assert e.elements == [-3, -1, 0, 1, 3]
    assert e.t3() == math.ceil(5 * 5 / 2)
    assert threeap.generate_family("F", 1, 1).elements == [-1, 0, 1, 3]

    r = threeap.max3ap_integers(5)
    assert r.value == 13
    tags = sorted(threeap.classify(w)[0] for w in r.witnesses)
    assert tags == ["E(1,1)", "E(2,0)"], tags

    assert threeap.extremal_mod(3, 7).value == 5
    assert threeap.extremal_mod(4, 5).value == 12
    direct = threeap.extremal_mod(5, 13, side="min")
    via = threeap.extremal_mod(5, 13, side="min", via_complement=True)
    assert direct.value == via.value and direct.witnesses == via.witnesses
    try:
        threeap.extremal_mod(10, 101)
    except threeap.BudgetExceededError:
        pass
    else:
        raise AssertionError("budget guard did not fire")
    try:
        threeap.ResidueSet(5, [5])
    except ValueError:
        pass
    else:
        raise AssertionError("out-of-range residue accepted")

    w = threeap.wraparound_complement(4801, 400, 800)
    assert abs(w.t3() / 4801**2 - 5 / 48) < 0.01
    x, lam, mu, feasible = threeap.intersect_search(w, w, trials=16, seed=1)
    assert feasible and abs(x.density() - 0.25) < 0.02

    interval = threeap.ResidueSet(10007, range(40)).dilate(1234)
    assert threeap.rectify(interval)[2] == 39

    passed, rows = threeap.run_suite("t3-energy", seed=1, cases=200)
    assert passed and len(rows) == 200

    assert threeap.cutoff(12) == "0.317306119615"

    ledger = threeap.Ledger.with_grid(["1/4", "1/2"])
    ledger.insert("m3", "1/2", "upper", "5/48", "wraparound")
    ledger.closure()
    assert ledger.best_upper("m3", "1/4") == "25/2304"
    assert ledger.is_consistent()
    assert json.loads(ledger.to_json())["grid"]

    print("threeap smoke test passed")


if __name__ == "__main__":
    main()
