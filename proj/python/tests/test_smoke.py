import json
import math
import os
from pathlib import Path

import numpy as np
import pytest

import tradeoff as t

FIXTURES = Path(os.environ.get("TRADEOFF_FIXTURE_DIR", Path(__file__).resolve().parents[2] / "fixtures"))


def f1(alpha=1.0):
    return t.Market(1.0, [1.0], [[0.5], [1.0 + alpha]], [0.45, 0.55])


def f2():
    payoffs = [[2, 4], [2, 0], [0, 4], [0, 0]]
    return t.Market(1.0, [1.0, 1.0], payoffs, [0.25] * 4)


def golden_max(f, lo, hi, iters=200):
    g = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    for _ in range(iters):
        c, d = b - g * (b - a), a + g * (b - a)
        if f(c) > f(d):
            b = d
        else:
            a = c
    return 0.5 * (a + b)


def test_market_validation():
    with pytest.raises(t.TradeoffError, match="ProbabilitySumNotOne"):
        t.Market(1.0, [1.0], [[1.0], [2.0]], [0.5, 0.6])
    with pytest.raises(t.TradeoffError):
        t.Market(1.0, [1.0], [[-1.0], [2.0]], [0.5, 0.5])


def test_structure_and_covariance():
    m = f2()
    np.testing.assert_allclose(t.covariance(m), np.diag([1.0, 4.0]), atol=1e-14)
    report = t.detect_nontrivial_riskless(m)
    assert report.all_clear and report.rank_g == 2
    assert not t.detect_arbitrage(m)
    assert t.detect_arbitrage(t.Market(1.0, [1.0], [[1.0], [3.0]], [0.5, 0.5]))


def test_markowitz_scalars_match_direct_formulas():
    m = f2()
    sigma_inv = np.linalg.inv(t.covariance(m))
    mean, prices = m.expected_payoffs, m.prices
    s = t.markowitz_scalars(t.covariance(m), mean, prices)
    assert s.alpha == pytest.approx(mean @ sigma_inv @ mean)
    assert s.beta == pytest.approx(mean @ sigma_inv @ prices)
    assert s.gamma == pytest.approx(prices @ sigma_inv @ prices)
    assert s.disc == pytest.approx(s.alpha * s.gamma - s.beta**2)


def test_generic_solver_agrees_with_closed_form():
    m = f2()
    cov = t.covariance(m)
    s = t.markowitz_scalars(cov, m.expected_payoffs, m.prices)
    hv = t.RiskMeasure.half_variance(cov)
    for mu in (1.2, 1.5, 2.5):
        r = t.min_risk_given_utility(m, hv, t.Utility.identity(), mu, admissible=t.AdmissibleSet.UNIT_COST_RISKY_ONLY)
        assert math.sqrt(2 * r.risk) == pytest.approx(t.markowitz_sigma(s, mu), abs=1e-7)


def test_capm_summary():
    m = f2()
    k = t.capm_summary(t.covariance(m), m.expected_payoffs, m.prices, 1.0)
    assert k.delta == pytest.approx(0.25)
    assert (k.sigma_m, k.mu_m) == (pytest.approx(2.0), pytest.approx(2.0))
    np.testing.assert_allclose(k.x_m.x_hat, [0.0, 1.0], atol=1e-12)


def test_kelly_against_golden_section():
    g = t.growth_optimal(f1())
    growth = lambda f: 0.55 * math.log1p(f) + 0.45 * math.log1p(-0.5 * f)
    f_star = golden_max(growth, 0.0, 1.999)
    assert g.kappa.x_hat[0] == pytest.approx(f_star, abs=1e-7)
    assert g.mu_kappa == pytest.approx(growth(f_star), abs=1e-9)
    assert t.kelly_two_state(1.0) == pytest.approx(0.65)
    with pytest.raises(t.TradeoffError, match="AlphaTooSmall"):
        t.kelly_two_state(0.4)


def test_martingale_measure():
    q = t.extract_emm(f1(), t.Utility.log())
    np.testing.assert_allclose(q, [2 / 3, 1 / 3], atol=1e-8)
    np.testing.assert_allclose(t.verify_emm(f1(), q), 0.0, atol=1e-8)


def test_frontier_trace_is_monotone():
    m = f1()
    curve = t.trace_frontier(m, t.RiskMeasure.abs_exposure([1.0]), t.Utility.log(), list(np.linspace(0.0, 0.09, 7)))
    risks = [p.risk for p in curve.points]
    assert risks[0] == 0.0
    assert all(b >= a for a, b in zip(risks, risks[1:]))


def test_run_command_writes_reports(tmp_path):
    assert "growth" in t.command_names()
    code = t.run_command("growth", str(FIXTURES / "f1_kelly.json"), str(tmp_path))
    assert code == 0
    report = json.loads((tmp_path / "growth.json").read_text())
    assert report["mu_kappa"] == pytest.approx(0.0985572437, abs=1e-9)
    run = json.loads((tmp_path / "run.json").read_text())
    assert run["command"] == "growth" and run["exit_status"] == 0
