"""Smoke test for the holext Python extension.

Build the module first, e.g. `maturin develop -m crates/python/Cargo.toml`,
or put the compiled library on PYTHONPATH as holext.so.
"""

import cmath
import math

import holext


def close(a, b, tol):
    assert abs(a - b) <= tol, f"{a} vs {b}"


def main():
    close(holext.eta(1j), 0.768225422326057, 1e-13)
    close(holext.log_eta(10j), -10 * math.pi / 12, 1e-12)
    close(holext.paper_log_det(1j), 1.31053292591151, 1e-12)

    rep = holext.spectral_log_det(0.3 + 1.1j, metric="unit-area")
    s = holext.spectral_log_det(-1 / (0.3 + 1.1j), metric="unit-area")
    close(rep["log_det"], s["log_det"], 1e-8)
    close(rep["zeta_at_zero"], -1.0, 1e-9)

    v = holext.genus1_extension(0.1 + 1.2j, -0.3 - 0.8j)
    close(v, 0.406794348487218 - 0.000492935840359754j, 1e-12)
    inv = holext.modular_invariance(0.1 + 1.2j, -0.3 - 0.8j, ["S", "T", "T^-1", "S"])
    assert inv["relative"] < 1e-9, inv

    cat = holext.FormCatalog()
    assert "wp_genus1" in cat.names()
    z, w = [1.5j], [-0.7j]
    q = cat.potential("wp_genus1", z, w)
    close(cmath.exp(q), cmath.exp(cat.closed_form("wp_genus1", z, w)), 1e-10)

    pts = [0.5 * cmath.exp(1j * k) * (k % 3 + 1) / 3 for k in range(30)]
    fit = holext.polarize(pts, [abs(p) ** 2 for p in pts], 2)
    close(fit(0.2 + 0.1j, 0.3 - 0.4j), (0.2 + 0.1j) * (0.3 - 0.4j), 1e-10)
    try:
        holext.polarize(pts[:3], [0, 0, 0], 3)
        raise AssertionError("expected failure")
    except RuntimeError as e:
        assert "insufficient" in str(e)
    try:
        holext.eta(-1j)
        raise AssertionError("expected failure")
    except ValueError:
        pass

    recipe = holext.ExtensionRecipe("diagonal = paper")
    close(recipe.diagonal(0.1 + 1.4j), holext.paper_log_det(0.1 + 1.4j), 1e-6)
    shift = 0.5 * math.log(2 * math.pi)
    close(recipe(0.05 + 1.45j, 0.1 - 1.6j), holext.genus1_extension(0.05 + 1.45j, 0.1 - 1.6j) + shift, 1e-6)

    report = holext.verify_all(fast=True)
    assert report["pass"], [c for c in report["checks"] if not c["pass"]]
    print(f"smoke test passed ({len(report['checks'])} suite checks)")


if __name__ == "__main__":
    main()
