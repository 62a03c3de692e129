"""Smoke test for the powerfree extension module.

Build and run:
    maturin build --release -m crates/python/Cargo.toml -o dist
    pip install dist/powerfree-*.whl
    python crates/python/python/smoke_test.py
"""

import json

import powerfree


def main():
    table = powerfree.PrimeTable(100)
    assert table.pi(30) == 10
    assert table.factorize(360) == [(2, 3), (3, 2), (5, 1)]

    report = powerfree.bound_report(3, 40)
    assert report["main_term"] == 20
    assert report["thm4_upper"] == 20
    assert report["exact"] == 20
    assert powerfree.bound_report(6, 1000)["exact"] is None

    r = powerfree.solve(3, 14)
    assert r.value == 9, r
    assert len(r.witness) == 9
    assert powerfree.find_zero_sum(r.witness, 3) is None
    assert [powerfree.solve(2, n).value for n in range(2, 31)] == [
        table.pi(n) for n in range(2, 31)
    ]

    cert = powerfree.construct(2, 12, verify=True)
    assert cert.full_set == [5, 6, 7, 11, 12]
    assert cert.verified
    again = powerfree.ConstructionCertificate.from_json(cert.to_json())
    assert again.verify() == (True, [])
    assert json.loads(cert.to_json())["claimed_size"] == 5

    try:
        powerfree.construct(3, 39)
    except powerfree.ThresholdNotMet as e:
        assert "minimum N is 40" in str(e)
    else:
        raise AssertionError("construct below the threshold should raise")

    assert powerfree.find_zero_sum([2, 8], 2) == [2, 8]
    assert powerfree.is_power_product([2, 8], 2)

    g = powerfree.GroupSpec("3^2")
    assert g.olson() == 5
    assert g.exact()[0] == 5
    assert powerfree.GroupSpec("6^2").upper_bound() == 16
    try:
        powerfree.GroupSpec("6").olson()
    except powerfree.NotApplicable:
        pass
    else:
        raise AssertionError("Olson's formula needs a p-group")

    try:
        powerfree.solve(5, 40, budget=100)
    except powerfree.BudgetExhausted as e:
        _, lower, upper, incumbent = e.args
        assert lower <= 29 <= upper and len(incumbent) == lower
    else:
        raise AssertionError("a 100-node budget should run out")

    print("powerfree smoke test passed")


if __name__ == "__main__":
    main()
