"""The variance/volatility process.

The model drives the instantaneous log volatility v by

    dv_t = (a - b e^(alpha v_t)) dt + sigma dw_t,      V_t = e^(2 v_t),

which admits a pathwise-exact solution in terms of the driving Brownian
motion. This module houses that solution, the reduction to the
Shiryaev/Wong process Z = e^(-alpha v), moment ODEs, short- and long-term
asymptotics, and the martingale classification of the forward.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import DomainError
from .specialfn import log_gamma


@dataclass(frozen=True)
class ModelParams:
    """Model parameter bundle (all rates annualized, times in years).

    alpha : exponent of the mean-reversion term, > 0
    a     : drift level of the log volatility (no sign constraint)
    b     : mean-reversion strength, > 0
    sigma : volatility of the log volatility, > 0
    rho   : spot/vol correlation in [-1, 1]
    v0    : initial log volatility; the initial variance is V0 = e^(2 v0)
    f0    : initial forward, > 0
    """

    alpha: float
    a: float
    b: float
    sigma: float
    rho: float
    v0: float
    f0: float = 1.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise DomainError(f"alpha must be > 0, got {self.alpha}")
        if not self.b > 0:
            raise DomainError(f"b must be > 0, got {self.b}")
        if not self.sigma >= 0:
            raise DomainError(f"sigma must be >= 0, got {self.sigma}")
        if not abs(self.rho) <= 1:
            raise DomainError(f"rho must lie in [-1, 1], got {self.rho}")
        if not self.f0 > 0:
            raise DomainError(f"f0 must be > 0, got {self.f0}")

    @property
    def V0(self) -> float:
        return math.exp(2.0 * self.v0)

    @classmethod
    def from_variance(cls, alpha, a, b, sigma, rho, V0, f0=1.0) -> "ModelParams":
        if not V0 > 0:
            raise DomainError(f"V0 must be > 0, got {V0}")
        return cls(alpha, a, b, sigma, rho, 0.5 * math.log(V0), f0)


@dataclass(frozen=True)
class ShiryaevParams:
    """Reduced coordinates: e^(-alpha v_t) = q * Y^(nu)_(t/c)(V0^(-alpha/2)/q)."""

    nu: float
    q: float
    c: float


class MartingaleRule(enum.Enum):
    ALPHA_GE2 = "AlphaGE2"
    RHO_NONPOSITIVE = "RhoNonPositive"
    ALPHA_GT1 = "AlphaGT1"
    ALPHA_EQ1_B_GE_RHO_SIGMA = "AlphaEQ1_bGErhoSigma"
    FAILS = "Fails"


@dataclass(frozen=True)
class MartingaleVerdict:
    is_martingale: bool
    rule: MartingaleRule


@dataclass(frozen=True)
class InvertedModel:
    """Dynamics of 1/f under the measure change induced by the forward."""

    kind: str  # "unchanged" | "alpha1" | "driftless" | "outside_family"
    params: Optional[ModelParams]


class HorizonExceededError(DomainError):
    """The pathwise solution left its validity region (possible for b < 0)."""

    def __init__(self, t_star_index: int, t_star: float):
        self.t_star_index = t_star_index
        self.t_star = t_star
        super().__init__(
            f"variance path undefined from grid point {t_star_index} "
            f"(t ~ {t_star}): log argument became non-positive")


# ---------------------------------------------------------------------------
# pathwise-exact solution
# ---------------------------------------------------------------------------

def _v_path_core(alpha, a, b, sigma, v0, times, w2):
    times = np.asarray(times, dtype=float)
    w2 = np.asarray(w2, dtype=float)
    if times.ndim != 1 or times.size < 1:
        raise DomainError("times must be a 1-d grid")
    if times[0] != 0.0 or np.any(np.diff(times) <= 0.0):
        raise DomainError("times must start at 0 and be strictly increasing")
    if w2.shape[-1] != times.size - 1:
        raise DomainError("w2 must hold one increment per grid step")
    w = np.concatenate(
        [np.zeros(w2.shape[:-1] + (1,)), np.cumsum(w2, axis=-1)], axis=-1)
    drift = a * times + sigma * w
    integrand = np.exp(alpha * drift)
    dt = np.diff(times)
    panels = 0.5 * dt * (integrand[..., 1:] + integrand[..., :-1])
    integral = np.concatenate(
        [np.zeros(panels.shape[:-1] + (1,)), np.cumsum(panels, axis=-1)], axis=-1)
    arg = 1.0 + alpha * b * math.exp(0.5 * alpha * 2.0 * v0) * integral
    if np.any(arg <= 0.0):
        bad = np.argmax(np.any((arg <= 0.0).reshape(-1, times.size), axis=0))
        raise HorizonExceededError(int(bad), float(times[int(bad)]))
    return v0 + drift - np.log(arg) / alpha


def exact_v_path(p: ModelParams, times, w2) -> np.ndarray:
    """Log-volatility path on a grid, exact in the driving Brownian motion.

    v_t = v0 + a t + sigma w_t - ln(1 + alpha b V0^(alpha/2) A_t)/alpha with
    A_t = int_0^t exp(alpha(a s + sigma w_s)) ds discretized by the trapezoid
    rule on the supplied grid. ``w2`` holds Brownian increments per grid step
    (leading axes, if any, enumerate paths).
    """
    return _v_path_core(p.alpha, p.a, p.b, p.sigma, p.v0, times, w2)


def noiseless_variance(p: ModelParams, t) -> np.ndarray:
    """V_t in the sigma = 0 limit: V0 e^(2at) / (1 + (b/a) V0^(a/2)(e^(a a t)-1))^(2/a)."""
    t = np.asarray(t, dtype=float)
    x = p.alpha * p.a * t
    # (b/a)(e^(alpha a t) - 1) == alpha b t * expm1(x)/x, stable through a -> 0
    phi1 = np.where(np.abs(x) < 1e-8, 1.0 + x / 2.0, np.expm1(x) / np.where(x == 0, 1.0, x))
    w = p.alpha * p.b * p.V0 ** (p.alpha / 2.0) * t * phi1
    return p.V0 * np.exp(2.0 * p.a * t) / (1.0 + w) ** (2.0 / p.alpha)


def to_shiryaev(p: ModelParams) -> ShiryaevParams:
    """Map to the affine process Y: e^(-alpha v_t) = q Y^(nu)_(t/c)(V0^(-alpha/2)/q).

    nu = -2a/(alpha sigma^2), q = 2b/(alpha sigma^2), c = 2/(alpha sigma)^2.
    The time scale c comes from matching the quadratic variation
    (alpha sigma)^2 c u = 2u of the driving noise; Monte Carlo of the exact
    variance path pins it down unambiguously.
    """
    if p.sigma == 0:
        raise DomainError("Shiryaev reduction needs sigma > 0")
    s2 = p.alpha * p.sigma ** 2
    return ShiryaevParams(nu=-2.0 * p.a / s2, q=2.0 * p.b / s2,
                          c=2.0 / (p.alpha * s2))


# ---------------------------------------------------------------------------
# moments of Z = e^(-alpha v)
# ---------------------------------------------------------------------------

def _expoly_integrate(expoly, k_l, tol=1e-10):
    """int_0^t e^(-k_l s) (sum c s^m e^(k s)) ds as an exp-polynomial of t,
    already multiplied back by e^(k_l t)."""
    out = {}

    def _add(key, c):
        out[key] = out.get(key, 0.0) + c

    for (k, m), c in expoly.items():
        kap = k - k_l
        if abs(kap) < tol * max(1.0, abs(k), abs(k_l)):
            _add((k_l, m + 1), c / (m + 1))
            continue
        # int_0^t s^m e^(kap s) ds = P(t) e^(kap t) - P(0), with
        # P(s) = sum_j (-1)^j (m!/(m-j)!) s^(m-j) / kap^(j+1)
        fall = 1.0
        for j in range(m + 1):
            coef = ((-1) ** j) * fall / kap ** (j + 1)
            _add((k, m - j), c * coef)
            fall *= (m - j)
        p0 = ((-1) ** m) * math.factorial(m) / kap ** (m + 1)
        _add((k_l, 0), -c * p0)
    return out


def z_moment(p: ModelParams, l: int, t: float) -> float:
    """E[Z_t^l] for Z = e^(-alpha v), by exact solution of the moment ODEs.

    The moments satisfy the triangular linear system
    dM^(l)/dt = m l M^(l-1) + (n l + l(l-1) p^2/2) M^(l)
    with m = alpha b, n = alpha^2 sigma^2/2 - alpha a, p = alpha sigma,
    solved sequentially over an exponential-polynomial basis.
    """
    if l < 1 or l != int(l):
        raise DomainError(f"moment order must be a positive integer, got {l}")
    m_c = p.alpha * p.b
    n_c = 0.5 * p.alpha ** 2 * p.sigma ** 2 - p.alpha * p.a
    p_c = p.alpha * p.sigma
    z0 = math.exp(-p.alpha * p.v0)

    cur = {(0.0, 0): 1.0}  # M^(0) = 1
    for j in range(1, int(l) + 1):
        k_j = n_c * j + 0.5 * j * (j - 1) * p_c ** 2
        source = {key: m_c * j * c for key, c in cur.items()}
        integ = _expoly_integrate(source, k_j)
        integ[(k_j, 0)] = integ.get((k_j, 0), 0.0) + z0 ** j
        cur = integ
    t = float(t)
    return float(sum(c * t ** m * math.exp(k * t) for (k, m), c in cur.items()))


# ---------------------------------------------------------------------------
# martingale classification and inversion
# ---------------------------------------------------------------------------

def martingale_classify(p: ModelParams) -> MartingaleVerdict:
    """Is the forward a true martingale?

    Yes iff alpha >= 2, or rho <= 0, or 1 < alpha < 2, or
    (alpha == 1 and b >= rho sigma). The failures are alpha < 1 with rho > 0
    and alpha == 1 with b < rho sigma (strict supermartingale).
    """
    if p.alpha >= 2.0:
        return MartingaleVerdict(True, MartingaleRule.ALPHA_GE2)
    if p.rho <= 0.0:
        return MartingaleVerdict(True, MartingaleRule.RHO_NONPOSITIVE)
    if p.alpha > 1.0:
        return MartingaleVerdict(True, MartingaleRule.ALPHA_GT1)
    if p.alpha == 1.0 and p.b >= p.rho * p.sigma:
        return MartingaleVerdict(True, MartingaleRule.ALPHA_EQ1_B_GE_RHO_SIGMA)
    return MartingaleVerdict(False, MartingaleRule.FAILS)


def inverted_model(p: ModelParams) -> InvertedModel:
    """Dynamics of 1/f under the forward measure.

    The drift of v gains sigma rho e^v, so the inverted model stays in the
    family only for rho = 0 (unchanged) or alpha = 1 (b -> b - rho sigma).
    """
    if not martingale_classify(p).is_martingale:
        raise DomainError("inverted_model requires a martingale forward")
    if p.rho == 0.0:
        return InvertedModel("unchanged", p)
    if p.alpha == 1.0:
        b_new = p.b - p.rho * p.sigma
        if b_new <= 0.0:
            # b == rho sigma: under the new measure v is Brownian with drift a
            return InvertedModel("driftless", None)
        return InvertedModel("alpha1", replace(p, b=b_new))
    return InvertedModel("outside_family", None)


# ---------------------------------------------------------------------------
# short- and long-term behaviour
# ---------------------------------------------------------------------------

def _short_slope(p: ModelParams) -> float:
    return 2.0 * p.a + 2.0 * p.sigma ** 2 - 2.0 * p.b * p.V0 ** (p.alpha / 2.0)


def short_term_ev(p: ModelParams, t) -> np.ndarray:
    """First-order small-t expansion of E[V_t]."""
    t = np.asarray(t, dtype=float)
    return p.V0 * (1.0 + _short_slope(p) * t)


def short_term_vs(p: ModelParams, t) -> np.ndarray:
    """First-order small-t expansion of the variance-swap rate vs(t)."""
    t = np.asarray(t, dtype=float)
    return p.V0 * (1.0 + _short_slope(p) * t / 2.0)


def vs_upper_bound_alpha2(p: ModelParams, t) -> np.ndarray:
    """Jensen bound for alpha = 2: vs(t) < ln(1 + 2b V0 (e^(kt)-1)/k)/(2bt),
    k = 2a + 2 sigma^2. Strict for t > 0; tends to V0 as t -> 0."""
    if abs(p.alpha - 2.0) > 1e-12:
        raise DomainError("vs_upper_bound_alpha2 requires alpha == 2")
    t = np.asarray(t, dtype=float)
    k = 2.0 * p.a + 2.0 * p.sigma ** 2
    x = k * t
    phi1 = np.where(np.abs(x) < 1e-8, 1.0 + x / 2.0, np.expm1(x) / np.where(x == 0, 1.0, x))
    inner = 2.0 * p.b * p.V0 * t * phi1
    out = np.where(t == 0.0, p.V0,
                   np.log1p(inner) / np.where(t == 0.0, 1.0, 2.0 * p.b * t))
    return out


def long_term_limit(p: ModelParams) -> float:
    """Common t -> infinity limit of E[V_t] and vs(t), for a > 0.

    (2b/(alpha sigma^2))^(-2/alpha) * Gamma(mu + 2/alpha)/Gamma(mu) with
    mu = 2a/(alpha sigma^2); reduces to a/b for alpha = 2 and to
    (sigma^2/2b)^2 (2a/sigma^2)(1 + 2a/sigma^2) for alpha = 1.
    """
    if not p.a > 0:
        raise DomainError("long_term_limit requires a > 0")
    if p.sigma == 0:
        raise DomainError("long_term_limit requires sigma > 0")
    mu = 2.0 * p.a / (p.alpha * p.sigma ** 2)
    q = 2.0 * p.b / (p.alpha * p.sigma ** 2)
    gmoment = math.exp((log_gamma(mu + 2.0 / p.alpha) - log_gamma(mu)).real)
    return q ** (-2.0 / p.alpha) * gmoment
