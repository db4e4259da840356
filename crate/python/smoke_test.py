"""Smoke test for the Python bindings.

Build first:  pip install -e crates/py --no-build-isolation
Run:          python python/smoke_test.py
"""

import json
import math
import pathlib

import cosserat

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "crates" / "core" / "fixtures"


def main():
    c = cosserat.derive("c")
    assert abs(c["v4"] - 4.47214) < 1e-5 and abs(c["v3"] - 3.51188) < 1e-5, c

    params = json.loads((FIXTURES / "type_a.json").read_text())
    assert cosserat.classify(params)[0] == "a"
    d = cosserat.derive(params)
    assert cosserat.k_of_v(params, d["v0"]) < 1e-10
    assert cosserat.k_of_v(params, 0.5 * (d["v3"] + d["v4"])) is None

    z = [-30.0 + 0.1 * i for i in range(601)]
    phi = cosserat.soliton_phi(params, 0.1, z)
    assert phi[0] < 1e-6 and abs(phi[-1] - 2 * math.pi) < 1e-6
    assert all(b >= a for a, b in zip(phi, phi[1:]))
    psi = cosserat.psi_quadrature(params, 0.1, z)
    assert len(psi) == len(z) and abs(psi[0]) < 1e-6

    try:
        cosserat.soliton_phi(params, 4.0, z)
    except ValueError as e:
        assert "forbidden" in str(e)
    else:
        raise AssertionError("v = 4 should be forbidden")

    m = cosserat.simulate(params, 0.1, n=1024, t_end=2.0)
    assert abs(m["measured_speed"] - 0.1) < 1e-3 and m["l2_shape_error"] < 1e-3, m

    passed, failures, findings = cosserat.verify_suites("soliton")
    assert passed, failures
    assert "exponent-condition-sign" in findings

    print("python smoke test: ok")


if __name__ == "__main__":
    main()
