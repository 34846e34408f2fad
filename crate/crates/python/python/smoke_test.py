"""Smoke test for the epigamble_py extension module."""

import json
import math

import epigamble_py as eg


def close(a, b, tol):
    assert abs(a - b) <= tol, f"{a} vs {b}"


def main():
    p = eg.GameParams(0.7124, 1.0)
    rep = eg.bound(2 * math.pi / 3, p)
    assert f"{rep['b_q']:.4f}" == "0.0639", rep
    close(rep["omega_max"], p.omega_max(), 1e-12)

    g = eg.gamble(math.pi, eg.GameParams(0.2, 0.7))
    close(g["s_gam"], 1.0, 1e-8)
    assert len(g["povm"]) == 3

    rho1 = [[1.0, 0.0], [0.0, 0.0]]
    rho2 = [[0.5, 0.5], [0.5, 0.5]]
    sdp, oracle = eg.weighted_distinguishability(rho1, 0.3, rho2, 0.7)
    close(sdp, oracle, 1e-7)
    close(eg.gambling_value(rho1, rho1, eg.GameParams(0.0, 0.0))["value"], 0.5, 1e-8)

    ss = eg.seesaw(p, restarts=4, seed=1)
    close(ss["b_ql"], 0.0638519, 1e-6)
    close(ss["theta_scaled"], 2 / 3, 1e-2)

    ub = eg.upper_bound(p, interlink="full", b_ql=ss["b_ql"])
    assert ub["b_qub"] >= ss["b_ql"] - 1e-7
    assert ub["gap_to_seesaw"] <= 1e-3

    model = eg.OnticModel.psi_ontic()
    report = model.report(eg.GameParams(1.0, 1.0))
    close(report["omega_lambda"], 0.0, 1e-12)
    close(report["s_lambda"], 1.0, 1e-12)
    ident = eg.OnticModel.identical()
    close(ident.overlap(p)["omega_lambda"], p.omega_max(), 1e-9)
    again = eg.OnticModel.from_json(model.to_json())
    assert again.n == model.n

    try:
        eg.GameParams(1.5, 0.0)
    except ValueError:
        pass
    else:
        raise AssertionError("invalid alpha accepted")
    try:
        eg.OnticModel.from_json(json.dumps({"n": 2, "mu1": [1.0, 0.0], "mu2": [0.5]}))
    except ValueError as e:
        assert "mu2" in str(e), e
    else:
        raise AssertionError("malformed model accepted")

    print(f"epigamble_py {eg.__version__}: smoke test passed")


if __name__ == "__main__":
    main()
