"""Smoke test for the qleg extension module.

Build and install with `maturin develop -m crates/python/Cargo.toml`, or copy
`target/release/libqleg_py.so` to `qleg.so` on PYTHONPATH, then run this file.
"""

import json
import math

import qleg


def close(a, b, tol=1e-13):
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def main():
    assert qleg.little_q_jacobi(0, 0.5, 0.2, 0.9, 0.3) == 1.0
    assert close(qleg.monic_big_q_jacobi00(1, 0.3, 0.8, 0.2, 0.5), -0.3)
    for path in ("series-c", "series-d", "recurrence"):
        a = qleg.monic_big_q_jacobi00(4, 0.3, 0.8, 0.2, 0.5, path=path, extended=True)
        b = qleg.monic_big_q_jacobi00(4, 0.3, 0.8, 0.2, 0.5)
        assert close(a, b, 1e-10), (path, a, b)

    assert close(qleg.qpochhammer(0.5, 0.5, 3), 0.5 * 0.75 * 0.875)

    eig = qleg.eigenvalues(0.0, 0.5, 40)
    for lam, _, _ in qleg.predicted_spectrum(0.0, 0.5, 6):
        assert min(abs(e - lam) for e in eig) < 1e-10, lam
    assert all(qleg.spectrum_check(0.3, 0.5, 60, 8))

    reports = qleg.run_suite("charlier", seed=qleg.DEFAULT_SEED)
    assert reports and all(r.passed for r in reports)
    row = json.loads(reports[0].to_json())
    for key in ("identity_id", "params", "lhs", "rhs", "abs_residual",
                "rel_residual", "tolerance", "passed", "truncation"):
        assert key in row, key
    again = qleg.run_suite("charlier", seed=qleg.DEFAULT_SEED)
    assert [r.to_json() for r in reports] == [r.to_json() for r in again]

    try:
        qleg.big_q_legendre(2, 0.1, 1.0, 0.5, 1.5)
    except ValueError:
        pass
    else:
        raise AssertionError("q outside (0, 1) was accepted")
    try:
        qleg.run_suite("nonsense")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown suite was accepted")

    assert issubclass(qleg.NonConvergenceError, RuntimeError)
    assert not math.isnan(qleg.q_charlier(3, 0.7, 0.4, 0.5))
    print(f"ok: {len(reports)} charlier reports, {len(eig)} eigenvalues")


if __name__ == "__main__":
    main()
