"""Smoke test for the bergtrace extension module.

Build first:  maturin develop -m crates/python/Cargo.toml --release
"""

import cmath
import json

import bergtrace

CIRCLE = json.dumps(
    {"alpha": 0, "beta": 0, "measure": {"kind": "circle_radial_derivative", "r0": 0.5}}
)
POINT = json.dumps(
    {"alpha": 1, "beta": 1, "measure": {"kind": "point_mass", "re": 0.5, "im": 0.0}}
)


def main():
    circle = bergtrace.Symbol(CIRCLE)
    report = bergtrace.trace_report(circle, dim=120)
    expected = -4 * 0.5 / (1 - 0.25) ** 3
    assert report["agree"], report
    assert abs(report["trace"]["re"] - expected) < 1e-7, report["trace"]

    point = bergtrace.Symbol(POINT)
    op = bergtrace.assemble(point, 32)
    assert op.hermitian and op.dim == 32
    assert abs(op.trace() - 2 * 1.5 / 0.75**4) < 1e-10
    spec = bergtrace.spectrum(op)
    assert spec["numerical_rank"] == 1, spec["numerical_rank"]

    z = cmath.rect(0.6, 1.0)
    series, _ = bergtrace.berezin_series(point, z)
    matrix, _ = bergtrace.berezin_matrix(bergtrace.assemble(point, 128), z)
    assert abs(series - matrix) < 1e-10, (series, matrix)

    assert point.adjoint().to_json() == point.to_json()
    rows = bergtrace.carleson_bound_estimate(point, 0, [8, 16])
    assert [d for d, _ in rows] == [8, 16]

    divergent = bergtrace.Symbol(
        json.dumps({"alpha": 1, "beta": 1, "measure": {"kind": "radial_power", "s": 2}})
    )
    try:
        bergtrace.trace_report(divergent)
    except bergtrace.NotTraceClassError:
        pass
    else:
        raise AssertionError("divergent symbol was accepted")

    suite = bergtrace.run_examples("ex42-norm")
    assert suite["pass"], suite
    print("smoke test passed")


if __name__ == "__main__":
    main()
