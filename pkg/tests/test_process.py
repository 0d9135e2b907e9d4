"""Variance-process tests: exact path, reductions, asymptotics, classifier."""

import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp
from scipy.stats import ks_2samp

from alphahyper.errors import DomainError
from alphahyper.process import (HorizonExceededError, MartingaleRule,
                                ModelParams, _v_path_core, exact_v_path,
                                inverted_model, long_term_limit,
                                martingale_classify, noiseless_variance,
                                short_term_ev, short_term_vs, to_shiryaev,
                                vs_upper_bound_alpha2, z_moment)

REF2 = ModelParams.from_variance(2.0, 0.1, 0.2, 0.3, 0.0, 0.04, 1.0)
REF1 = ModelParams.from_variance(1.0, 0.1, 0.3, 0.5, -0.5, 0.04, 1.0)


def brownian_increments(rng, n_paths, n_steps, dt):
    return math.sqrt(dt) * rng.standard_normal((n_paths, n_steps))


# ---------------------------------------------------------------------------
# ModelParams
# ---------------------------------------------------------------------------

def test_model_params_validation():
    with pytest.raises(DomainError):
        ModelParams(alpha=0.0, a=0.1, b=0.2, sigma=0.3, rho=0.0, v0=0.0)
    with pytest.raises(DomainError):
        ModelParams(alpha=1.0, a=0.1, b=-0.2, sigma=0.3, rho=0.0, v0=0.0)
    with pytest.raises(DomainError):
        ModelParams(alpha=1.0, a=0.1, b=0.2, sigma=0.3, rho=1.5, v0=0.0)
    p = ModelParams.from_variance(1.0, 0.1, 0.2, 0.3, 0.0, 0.09)
    assert p.V0 == pytest.approx(0.09, rel=1e-14)


# ---------------------------------------------------------------------------
# exact path
# ---------------------------------------------------------------------------

def test_exact_path_sigma_zero_matches_noiseless():
    p = ModelParams.from_variance(2.0, 0.1, 0.2, 0.0, 0.0, 0.04)
    times = np.linspace(0.0, 1.5, 3001)
    w2 = np.zeros(times.size - 1)
    v = exact_v_path(p, times, w2)
    v_ref = 0.5 * np.log(noiseless_variance(p, times))
    assert np.max(np.abs(v - v_ref)) < 2e-8  # trapezoid-rule error


def test_exact_path_small_b_is_arithmetic_brownian():
    p = ModelParams(alpha=1.0, a=0.07, b=1e-12, sigma=0.4, rho=0.0, v0=-1.0)
    rng = np.random.default_rng(0)
    times = np.linspace(0.0, 1.0, 101)
    w2 = brownian_increments(rng, 1, 100, 0.01)[0]
    v = exact_v_path(p, times, w2)
    ref = p.v0 + p.a * times + p.sigma * np.concatenate([[0.0], np.cumsum(w2)])
    assert np.max(np.abs(v - ref)) < 1e-10


def test_exact_path_beats_euler_at_first_order():
    # on a shared Brownian path, the Euler scheme drifts away at O(dt)
    p = ModelParams.from_variance(1.0, 0.1, 0.3, 0.5, 0.0, 0.04)
    rng = np.random.default_rng(123)
    n_fine = 1600
    times_fine = np.linspace(0.0, 1.0, n_fine + 1)
    w_fine = brownian_increments(rng, 64, n_fine, 1.0 / n_fine)

    def euler_terminal(times, w):
        dt = times[1] - times[0]
        v = np.full(w.shape[0], p.v0)
        for i in range(times.size - 1):
            v = v + (p.a - p.b * np.exp(p.alpha * v)) * dt + p.sigma * w[:, i]
        return v

    errs = []
    for factor in (4, 8):
        idx = np.arange(0, n_fine + 1, factor)
        times = times_fine[idx]
        w = np.add.reduceat(w_fine, np.arange(0, n_fine, factor), axis=1)
        exact_T = exact_v_path(p, times, w)[:, -1]
        eul_T = euler_terminal(times, w)
        errs.append(np.sqrt(np.mean((exact_T - eul_T) ** 2)))
    # halving dt roughly halves the gap (order one strong error of Euler)
    assert errs[1] / errs[0] > 1.5
    assert errs[1] < errs[0] * 3.0


def test_exact_path_rejects_bad_grids():
    p = REF1
    with pytest.raises(DomainError):
        exact_v_path(p, np.array([0.1, 0.2]), np.array([0.0]))
    with pytest.raises(DomainError):
        exact_v_path(p, np.array([0.0, 0.2, 0.1]), np.array([0.0, 0.0]))
    with pytest.raises(DomainError):
        exact_v_path(p, np.array([0.0, 0.1]), np.array([0.0, 0.0]))


def test_negative_b_horizon_detection():
    # b < 0 is outside ModelParams; the shared path core still guards the log
    times = np.linspace(0.0, 5.0, 501)
    w2 = np.zeros(times.size - 1)
    with pytest.raises(HorizonExceededError) as exc:
        _v_path_core(1.0, 0.3, -0.8, 0.0, 0.0, times, w2)
    assert exc.value.t_star > 0


def test_exact_path_finite_for_positive_b():
    p = ModelParams.from_variance(2.5, 0.4, 0.8, 0.6, 0.0, 0.09)
    rng = np.random.default_rng(5)
    times = np.linspace(0.0, 10.0, 2001)
    w2 = brownian_increments(rng, 16, 2000, times[1])
    v = exact_v_path(p, times, w2)
    assert np.all(np.isfinite(v))


def test_alpha_scaling_invariant():
    # alpha * v(v0, alpha, a, b, sigma) == v(alpha v0, 1, alpha a, alpha b, alpha sigma)
    rng = np.random.default_rng(21)
    times = np.linspace(0.0, 2.0, 401)
    w2 = brownian_increments(rng, 8, 400, times[1])
    for alpha in (0.5, 1.5, 2.0):
        p = ModelParams(alpha=alpha, a=0.1, b=0.3, sigma=0.4, rho=0.0, v0=-1.2)
        q = ModelParams(alpha=1.0, a=alpha * 0.1, b=alpha * 0.3,
                        sigma=alpha * 0.4, rho=0.0, v0=alpha * -1.2)
        lhs = alpha * exact_v_path(p, times, w2)
        rhs = exact_v_path(q, times, w2)
        assert np.max(np.abs(lhs - rhs)) < 1e-12


# ---------------------------------------------------------------------------
# noiseless limit
# ---------------------------------------------------------------------------

def test_noiseless_initial_value():
    assert float(noiseless_variance(REF2, 0.0)) == pytest.approx(0.04, rel=1e-14)


def test_noiseless_alpha2_long_time_limit():
    # I(t)/t -> a/b; the variance itself approaches a/b = 0.5
    assert float(noiseless_variance(REF2, 400.0)) == pytest.approx(0.5, rel=1e-8)


def test_noiseless_against_stiff_ode_oracle():
    p = REF2
    sol = solve_ivp(lambda t, v: p.a - p.b * np.exp(2.0 * v), (0.0, 1.0),
                    [p.v0], rtol=1e-11, atol=1e-12, dense_output=True)
    oracle = math.exp(2.0 * sol.sol(1.0)[0])
    assert float(noiseless_variance(p, 1.0)) == pytest.approx(oracle, rel=1e-8)


def test_noiseless_handles_zero_drift():
    p = ModelParams.from_variance(1.5, 0.0, 0.25, 0.0, 0.0, 0.09)
    v1 = float(noiseless_variance(p, 2.0))
    p_eps = ModelParams.from_variance(1.5, 1e-9, 0.25, 0.0, 0.0, 0.09)
    v2 = float(noiseless_variance(p_eps, 2.0))
    assert v1 == pytest.approx(v2, rel=1e-6)


# ---------------------------------------------------------------------------
# Shiryaev reduction
# ---------------------------------------------------------------------------

def test_to_shiryaev_reference_values():
    sh = to_shiryaev(REF1)
    assert sh.nu == pytest.approx(-0.8, rel=1e-14)
    assert sh.q == pytest.approx(2.4, rel=1e-14)
    assert sh.c == pytest.approx(8.0, rel=1e-14)


def test_to_shiryaev_zero_drift():
    p = ModelParams(alpha=1.3, a=0.0, b=0.3, sigma=0.5, rho=0.0, v0=-1.0)
    assert to_shiryaev(p).nu == 0.0


def test_shiryaev_roundtrip_distributional():
    # q Y_{t/c}(x0) must have the law of e^{-alpha v_t}; simulate Y with its
    # own Euler scheme and v with the exact path, then compare by KS
    p = REF1
    sh = to_shiryaev(p)
    t = 0.5
    n = 100_000
    rng = np.random.default_rng(77)

    steps = 400
    times = np.linspace(0.0, t, steps + 1)
    chunks = []
    for _ in range(10):
        w2 = brownian_increments(rng, n // 10, steps, times[1])
        chunks.append(np.exp(-p.alpha * exact_v_path(p, times, w2)[:, -1]))
    z_exact = np.concatenate(chunks)

    tau = t / sh.c
    x0 = p.V0 ** (-p.alpha / 2.0) / sh.q
    du = tau / steps
    y = np.full(n, x0)
    for _ in range(steps):
        dB = math.sqrt(du) * rng.standard_normal(n)
        y = np.abs(y + (1.0 + (1.0 + sh.nu) * y) * du + math.sqrt(2.0) * y * dB)
    z_mapped = sh.q * y

    stat = ks_2samp(z_exact, z_mapped).statistic
    crit_1pct = 1.628 * math.sqrt(2.0 / n)
    assert stat < crit_1pct


# ---------------------------------------------------------------------------
# moments of Z
# ---------------------------------------------------------------------------

def test_z_moment_initial_condition():
    for l in (1, 2, 3):
        assert z_moment(REF1, l, 0.0) == pytest.approx(
            math.exp(-l * REF1.alpha * REF1.v0), rel=1e-12)


def test_z_moment_first_order_closed_form():
    p = REF1
    m = p.alpha * p.b
    n = 0.5 * p.alpha ** 2 * p.sigma ** 2 - p.alpha * p.a
    z0 = math.exp(-p.alpha * p.v0)
    for t in (0.3, 1.0, 4.0):
        closed = (z0 + m / n) * math.exp(n * t) - m / n
        assert z_moment(p, 1, t) == pytest.approx(closed, rel=1e-12)


def test_z_moment_second_moment_against_mc():
    p = REF1
    t = 1.0
    rng = np.random.default_rng(2024)
    n_paths, steps = 1_000_000, 250
    times = np.linspace(0.0, t, steps + 1)
    total = 0.0
    total_sq = 0.0
    for chunk in range(10):
        w2 = brownian_increments(rng, n_paths // 10, steps, times[1])
        z = np.exp(-p.alpha * exact_v_path(p, times, w2)[:, -1]) ** 2
        total += z.sum()
        total_sq += np.square(z).sum()
    mean = total / n_paths
    se = math.sqrt((total_sq / n_paths - mean ** 2) / (n_paths - 1))
    assert abs(z_moment(p, 2, t) - mean) < 3.0 * se


# ---------------------------------------------------------------------------
# martingale classifier and inversion
# ---------------------------------------------------------------------------

CLASSIFIER_TABLE = [
    # (alpha, rho, b, expected, rule)
    (2.0, 0.9, 0.3, True, MartingaleRule.ALPHA_GE2),
    (2.5, 0.5, 0.1, True, MartingaleRule.ALPHA_GE2),
    (0.5, -0.3, 0.3, True, MartingaleRule.RHO_NONPOSITIVE),
    (1.0, 0.0, 0.3, True, MartingaleRule.RHO_NONPOSITIVE),
    (1.5, 0.5, 0.1, True, MartingaleRule.ALPHA_GT1),
    (1.0, 0.5, 0.35, True, MartingaleRule.ALPHA_EQ1_B_GE_RHO_SIGMA),
    (1.0, 0.5, 0.25, True, MartingaleRule.ALPHA_EQ1_B_GE_RHO_SIGMA),  # b = rho sigma
    (1.0, 0.8, 0.5, False, MartingaleRule.FAILS),   # b < rho sigma = 0.8 @ sigma=1
    (0.5, 0.5, 0.35, False, MartingaleRule.FAILS),
]


@pytest.mark.parametrize("alpha,rho,b,expected,rule", CLASSIFIER_TABLE)
def test_classifier_table(alpha, rho, b, expected, rule):
    sigma = 1.0 if (alpha, rho, b) == (1.0, 0.8, 0.5) else 0.5
    p = ModelParams(alpha=alpha, a=0.1, b=b, sigma=sigma, rho=rho, v0=-1.6)
    verdict = martingale_classify(p)
    assert verdict.is_martingale == expected
    assert verdict.rule == rule


def test_inverted_model_rho_zero_unchanged():
    p = ModelParams(alpha=1.7, a=0.1, b=0.3, sigma=0.4, rho=0.0, v0=-1.0)
    out = inverted_model(p)
    assert out.kind == "unchanged"
    assert out.params == p


def test_inverted_model_alpha1_shifts_b():
    p = ModelParams(alpha=1.0, a=0.1, b=0.5, sigma=0.5, rho=0.4, v0=-1.0)
    out = inverted_model(p)
    assert out.kind == "alpha1"
    assert out.params.b == pytest.approx(0.3, rel=1e-14)


def test_inverted_model_degenerate_and_outside():
    p = ModelParams(alpha=1.0, a=0.1, b=0.25, sigma=0.5, rho=0.5, v0=-1.0)
    assert inverted_model(p).kind == "driftless"
    q = ModelParams(alpha=1.5, a=0.1, b=0.3, sigma=0.5, rho=0.2, v0=-1.0)
    assert inverted_model(q).kind == "outside_family"


def test_inverted_model_rejects_non_martingale():
    p = ModelParams(alpha=1.0, a=0.1, b=0.1, sigma=1.0, rho=0.8, v0=-1.0)
    with pytest.raises(DomainError):
        inverted_model(p)


# ---------------------------------------------------------------------------
# short-term, bound, long-term
# ---------------------------------------------------------------------------

def test_short_term_at_zero():
    assert float(short_term_ev(REF2, 0.0)) == pytest.approx(REF2.V0, rel=1e-14)
    assert float(short_term_vs(REF2, 0.0)) == pytest.approx(REF2.V0, rel=1e-14)


def test_short_term_slope_arithmetic():
    p = ModelParams.from_variance(2.0, 0.1, 0.2, 0.3, 0.0, 0.04)
    slope = (float(short_term_ev(p, 1.0)) - p.V0)
    assert slope == pytest.approx(0.01456, rel=1e-12)
    half = (float(short_term_vs(p, 1.0)) - p.V0)
    assert half == pytest.approx(0.00728, rel=1e-12)


def test_short_term_matches_mc_at_small_t():
    p = REF2
    t = 0.01
    rng = np.random.default_rng(9)
    steps = 20
    times = np.linspace(0.0, t, steps + 1)
    w2 = brownian_increments(rng, 400_000, steps, times[1])
    v_t = exact_v_path(p, times, w2)[:, -1]
    mc = float(np.mean(np.exp(2.0 * v_t)))
    assert abs(mc / float(short_term_ev(p, t)) - 1.0) < 0.01


def test_vs_bound_alpha2_limits_and_arithmetic():
    p = ModelParams.from_variance(2.0, 0.1, 0.2, 0.3, 0.0, 0.04)
    assert float(vs_upper_bound_alpha2(p, 0.0)) == pytest.approx(p.V0, rel=1e-12)
    k = 2.0 * p.a + 2.0 * p.sigma ** 2
    t = 0.25
    expected = math.log1p(2.0 * p.b * p.V0 * (math.exp(k * t) - 1.0) / k) / (2.0 * p.b * t)
    assert float(vs_upper_bound_alpha2(p, t)) == pytest.approx(expected, rel=1e-12)
    with pytest.raises(DomainError):
        vs_upper_bound_alpha2(REF1, 0.5)


def test_long_term_limit_values():
    assert long_term_limit(ModelParams.from_variance(2.0, 0.1, 0.2, 0.3, 0.0, 0.04)) \
        == pytest.approx(0.5, rel=1e-12)
    assert long_term_limit(ModelParams.from_variance(1.0, 0.08, 0.5, 0.4, 0.0, 0.04)) \
        == pytest.approx(0.0512, rel=1e-12)
    with pytest.raises(DomainError):
        long_term_limit(ModelParams.from_variance(1.0, -0.1, 0.5, 0.4, 0.0, 0.04))
