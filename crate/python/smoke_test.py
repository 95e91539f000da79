"""Quick end-to-end check of the pyrtrb bindings.

Build and install the extension first:

    pip install -e crates/python --no-build-isolation
"""

import math
import os
import sys
import tempfile

import pyrtrb


def check(cond, what):
    if not cond:
        print(f"FAIL {what}")
        sys.exit(1)
    print(f"ok   {what}")


def main():
    q = pyrtrb.Quadrature("gl:8")
    check(len(q) == 8 and abs(sum(q.weights) - 1.0) < 1e-14, "Gauss-Legendre weights average to one")
    check(len(pyrtrb.Quadrature("circle:16").directions) == 16, "circle rule size")

    slab = pyrtrb.Problem.example("1d-2")
    check(slab.dimension == 1 and slab.default_cells == [80], "slab example metadata")

    sol = pyrtrb.solve_full(slab, "gl:8", cells=[40])
    check(sol.converged and not sol.diverged, "full-order solve converges")
    check(len(sol.fields) == 8 and len(sol.density) == 80, "field and density sizes")
    check(all(math.isfinite(x) for x in sol.density), "density is finite")

    model = pyrtrb.train_rb(slab, "gl:16", cells=[40])
    check(model.dimension == len(model.samples) == len(model.basis), "model dimension matches samples")
    pred = model.predict("gl:12")
    check(len(pred.fields) == 12, "prediction on a test set")

    restored = pyrtrb.Model.from_text(model.to_text())
    check(restored.basis == model.basis and restored.samples == model.samples, "model text round trip")

    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "model.txt")
        model.save(path)
        again = pyrtrb.Model.load(path).predict("gl:12")
        check(again.density == pred.density, "saved model predicts identically")

        report = pyrtrb.benchmark(slab, training="gl:12", test="gl:16", cells=[40])
        check(report.succeeded and report.testing_metrics.r_rho < 1e-2, "benchmark testing error")
        names = [n for n, _ in report.export(os.path.join(tmp, "out"))]
        check("metrics.toml" in names and "rho_full.csv" in names, "export manifest")

    rows = pyrtrb.sweep([1.0], r_tol=1e-4, n_train=8, n_test=10)
    check(len(rows) == 1 and rows[0][3] is None, "one-row sweep")

    try:
        pyrtrb.Problem.example("9d-9")
        check(False, "unknown tag raises")
    except pyrtrb.ConfigError:
        check(True, "unknown tag raises ConfigError")

    stalled = pyrtrb.solve_full(slab, "gl:8", cells=[16], accelerator="none", iter_tol=1)
    check(not stalled.converged and stalled.iterations == 1, "unconverged solve is reported")

    try:
        pyrtrb.train_rb(pyrtrb.Problem.example("1d-4"), "gl:8", accelerator="none", iter_tol=1)
        check(False, "stalled training raises")
    except pyrtrb.NotConvergedError:
        check(True, "stalled training raises NotConvergedError")

    print("smoke test passed")


if __name__ == "__main__":
    main()
