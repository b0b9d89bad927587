"""Smoke test for the pyadareg extension.

Build and install it first:

    pip install maturin
    maturin build --release -m crates/python/Cargo.toml
    pip install target/wheels/pyadareg-*.whl
"""

import math
import sys

import pyadareg as ad


def check(cond, what):
    print(("ok   " if cond else "FAIL ") + what)
    return cond


def main():
    ok = True

    pot = ad.Potential.adagrad(1.0)
    h = pot.minimize([[4.0, 0.0], [0.0, 1.0]])
    ok &= check(abs(h[0][0] - 0.5) < 1e-12 and abs(h[1][1] - 1.0) < 1e-12, "adagrad regularizer is G^{-1/2}")

    vals, vecs = ad.eig_sym([[2.0, 1.0], [1.0, 2.0]])
    ok &= check(sorted(round(v, 12) for v in vals) == [1.0, 3.0], "eig_sym eigenvalues")
    ok &= check(abs(ad.mahalanobis_norm([3.0, 4.0], [[1.0, 0.0], [0.0, 1.0]]) - 5.0) < 1e-12, "mahalanobis_norm")
    ok &= check(ad.psd_geq([[2.0, 0.0], [0.0, 2.0]], [[1.0, 0.0], [0.0, 1.0]]), "psd_geq")

    ball = ad.FeasibleSet.ball([0.0, 0.0, 0.0], 1.0)
    problem = ad.Problem("adv-linear", 3, 1, ball)
    engine = ad.Engine.preset("adagrad-full", ball, [0.0, 0.0, 0.0])
    x = engine.x
    for t in range(1, 51):
        _, g = problem.loss_and_gradient(t, x)
        x = engine.step(g)
    ok &= check(engine.t == 50 and ball.contains(x), "engine iterates stay in the ball")

    res = ad.run_experiment("ons-full", dim=3, horizon=300, seed=2)
    ok &= check(res["certificate"] == "pass", f"ons-full certificate ({res['final_regret']:.3f} <= {res['bound']:.3f})")
    ok &= check(len(res["cumulative_regret"]) == 300, "per-round regret curve")

    try:
        ad.run_experiment("adagrad-full", eta=0.5)
        ok &= check(False, "fixed parameter rejected")
    except ValueError:
        ok &= check(True, "fixed parameter rejected")

    passed, lines, failures = ad.verify(["matrix"], trials=3)
    ok &= check(passed and not failures, "verify matrix suite: " + "; ".join(lines))

    ok &= check(math.isfinite(ad.Potential.pnorm(1.0, 2.0).phi(2.0)), "pnorm potential")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
