#!/usr/bin/env python3
"""Smoke test for the dgcheck_py extension module.

Builds nothing itself: it expects `cargo build -p dgcheck-py` to have
produced target/debug/libdgcheck_py.so, stages it under an importable name,
and exercises the main types and pipelines.
"""

import pathlib
import shutil
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent


def stage_module() -> None:
    built = ROOT / "target" / "debug" / "libdgcheck_py.so"
    if not built.exists():
        sys.exit(f"missing {built}; run `cargo build -p dgcheck-py` first")
    staging = pathlib.Path(tempfile.mkdtemp(prefix="dgcheck_py_"))
    shutil.copy(built, staging / "dgcheck_py.so")
    sys.path.insert(0, str(staging))


def main() -> None:
    stage_module()
    import dgcheck_py as dg

    window = (-6, 0, 10)

    # the mixed-amplitude base and its polynomial extension
    amp = dg.Algebra(
        "q",
        [("u", 0, 1), ("e1", -1, 2), ("e2", -1, 3)],
        {"e1": "u^2", "e2": "u^3"},
    )
    table = amp.cohomology((-3, 0, 8))
    assert table.row(0) == [1, 1, 0, 0, 0, 0, 0, 0, 0], table.row(0)
    assert table.dim(-1, 3) == 1, "expected a surviving class in degree -1"

    bamp, phi = amp.extend([("x", 0, 1)])
    assert bamp.arity == 4

    # flatness by construction, then the smoothness equivalence
    assert phi.flat_check(window).holds()
    perfect, h0, agreement = phi.smooth_equiv(window)
    assert perfect.holds() and h0.holds() and agreement.holds(), agreement.evidence

    # lci + duality + rigidity for the same map
    lci = phi.lci(window)
    assert lci["overall"].holds(), lci["overall"].evidence
    n, twist, matched, per = phi.vdb((-6, 2, 10), ["E", "B", "B[1]"])
    assert (n, twist, matched) == (1, -1, True), (n, twist, matched)
    assert all(v.holds() for v in per.values())
    assert phi.rigid((-6, 2, 10)).holds()

    # regular and non-regular sequences
    assert bamp.regular_sequence(["x - u"], window).holds()
    d2 = dg.Algebra("q", [("x", 0, 1), ("e", -1, 2)], {"e": "x^2"})
    v = d2.regular_sequence(["x"], window)
    assert not v.holds() and "zero-divisor" in v.evidence[0], v.evidence

    # smoothness forces concentration in degree 0
    smooth, reduced, consistent = amp.flathz(window, max_stages=6)
    assert not smooth.holds() and not reduced.holds() and consistent.holds()

    # the failing pipeline agrees on failure
    k = dg.Algebra("q", [])
    psi = dg.Map(k, d2, {})
    perfect, h0, agreement = psi.smooth_equiv(window)
    assert not perfect.holds() and not h0.holds() and agreement.holds()

    # characteristic p
    amp_p = dg.Algebra(
        "fp:7",
        [("u", 0, 1), ("e1", -1, 2), ("e2", -1, 3)],
        {"e1": "u^2", "e2": "u^3"},
    )
    assert amp_p.cohomology((-3, 0, 8)).row(0) == table.row(0)

    # scenario driver: determinism and canonical printing
    scenario = (ROOT / "scenarios" / "main_theorem.dgs").read_text()
    first, code = dg.run_scenario(scenario)
    second, _ = dg.run_scenario(scenario)
    assert code == 0 and first == second
    canon = dg.canonical_scenario(scenario)
    assert dg.canonical_scenario(canon) == canon

    print("smoke test: PASS —", len(first.splitlines()), "structured report lines")


if __name__ == "__main__":
    main()
