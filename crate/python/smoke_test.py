"""Smoke test for the rswlab Python extension."""

import math

import rswlab


def main():
    model = rswlab.Model("bernoulli:p=0.5")
    assert model.p == 0.5 and model.is_symmetric_associated()
    assert not rswlab.Model("diag").is_symmetric_associated()

    engine = rswlab.Engine(workers=2)
    est = engine.estimate(model, "crossing:16x16", replicates=4000, seed=1)
    assert 0.45 <= est.phat <= 0.55, est
    assert est.wilson_lo <= est.phat <= est.wilson_hi
    assert est.n == 16 and est.rho == 1
    again = rswlab.Engine(workers=1).estimate(model, "crossing:16x16", replicates=4000, seed=1)
    assert again.to_json() == est.to_json()

    certain = engine.estimate(rswlab.Model("bernoulli:p=1"), "arm:4", replicates=100)
    assert certain.phat == 1.0 and certain.exact

    counts = engine.estimate_joint(model, ["crossing:4x4", "crossing:4x2"], replicates=1000)
    assert len(counts) == 4 and sum(counts) == 1000

    lo, hi = rswlab.wilson(5, 10)
    assert abs(lo - 0.23659309051256394) < 1e-12 and abs(hi - 0.7634069094874361) < 1e-12

    lp, _ = rswlab.homeo_f(0.5, 1)
    assert abs(lp - (-15935.17732382833557)) < 1e-6 * 15935
    lp, _ = rswlab.psi(0.5, 2)
    assert math.isclose(lp, -3.3737293950917913539e73, rel_tol=1e-9)

    assert rswlab.duality(1, 1) == (True, 4096)

    records = engine.verify("lemma42", model, [1, 4], replicates=2000, seed=3)
    verdicts = [r for r in records if r["schema"] == "rswlab/verdict/v1"]
    assert verdicts and all(v["status"] != "violated" for v in verdicts)

    diag = engine.verify("theorem1", rswlab.Model("diag"), [4], replicates=10)
    v = [r for r in diag if r["schema"] == "rswlab/verdict/v1"][0]
    assert v["status"] == "violated" and v["expected_failure"]

    assert rswlab.main(["verify", "--suite", "homeo", "--out", "/dev/null"]) == 0
    print("smoke test passed:", est)


if __name__ == "__main__":
    main()
