"""alpha = 1 analytics via the Morse-potential Green function.

After a Girsanov change removing the log-volatility drift, the generator of
v becomes a Schrodinger operator with a Morse potential
(nu2^2/2) e^(2v) - nu1 e^v, whose resolvent kernel is a product of Whittaker
functions. Integrating the kernel against the measure-changed initial
condition reduces every transform of interest to two integrals over z:

    I1 = int_0^z0     z^(eta - 1 + a/sigma^2) e^(delta z) Phi(.., ..; z) dz
    I2 = int_{z0}^inf z^(eta - 1 + a/sigma^2) e^(delta z) Psi(.., ..; z) dz

with z0 = 2 nu2 e^(v0). I1 is summed via incomplete-gamma recurrences run in
their stable (descending) direction; I2 via the Barnes residue series with
upper-incomplete-gamma recurrences, falling back to vectorized quadrature
where the residue series is outside its region or degrades. The double
transform g(lambda, p) = int e^(-pt) E[(f_t/f0)^lambda] dt assembled from
them satisfies p g(0, p) = 1 identically, which the test-suite uses as an
end-to-end canary.

The Laplace variable convention is p = s^2/2, so eta = sqrt(a^2/sigma^4
+ 2p/sigma^2) on the principal branch and Talbot's complex nodes are
well-defined.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from ._quadutil import graded_panel_quad, panelized_tail_quad
from ._scaled import Scaled
from .errors import DomainError, NonConvergenceError, StripError
from .process import ModelParams
from .specialfn import (SERIES_MAX_TERMS, SERIES_RTOL, SeriesEval,
                        _lower_series, _phi_vec, _psi_scaled, _psi_vec,
                        _upper_core_scaled, kummer_phi, log_gamma,
                        tricomi_psi, whittaker_m, whittaker_w)

_DEGENERACY_TOL = 1e-7
_SPOT_SERIES_CAP = 20.0  # |delta z0| beyond which the i_n seeds lose digits


def _require_alpha1(p: ModelParams):
    if abs(p.alpha - 1.0) > 1e-12:
        raise DomainError(f"this route requires alpha = 1, got alpha={p.alpha}")


# ---------------------------------------------------------------------------
# coefficient bundles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MellinCoeffs:
    """lambda-dependent coefficients of the spot's Mellin transform."""

    lam: complex
    alpha0: complex
    alpha1: complex
    alpha2_sq: complex
    beta0: complex
    beta1: complex
    beta2_sq: complex
    nu1: complex
    nu2: complex
    delta: complex
    lambda_minus: float
    lambda_plus: float
    a_over_sigma2: float  # carried for the z-powers in I1/I2


@dataclass(frozen=True)
class LaplaceVar:
    """Laplace variable p (kernel e^-pt, p = s^2/2) and eta(p)."""

    p: complex
    eta: complex

    @classmethod
    def from_p(cls, p, model: ModelParams) -> "LaplaceVar":
        p = complex(p)
        sig = model.sigma
        eta = cmath.sqrt(model.a ** 2 / sig ** 4 + 2.0 * p / sig ** 2)
        return cls(p=p, eta=eta)


def mellin_strip(p: ModelParams) -> tuple[float, float]:
    """Roots (lambda-, lambda+) of (lambda rho sigma - b)^2 + sigma^2 lambda(1-lambda)."""
    sig, b, rho = p.sigma, p.b, p.rho
    A = sig ** 2 * (1.0 - rho ** 2)
    if A <= 0:
        raise DomainError("Mellin strip undefined for |rho| = 1")
    B = sig ** 2 - 2.0 * b * rho * sig
    C = b ** 2
    disc = math.sqrt(B * B + 4.0 * A * C)
    return (B - disc) / (2.0 * A), (B + disc) / (2.0 * A)


def mellin_coeffs(p: ModelParams, lam) -> MellinCoeffs:
    """Coefficient bundle for the Mellin variable lambda.

    Real lambda must lie strictly inside (lambda-, lambda+); complex lambda
    must have its real part there (the vertical-line case).
    """
    _require_alpha1(p)
    lam = complex(lam)
    lm, lp = mellin_strip(p)
    if not (lm < lam.real < lp):
        raise StripError(
            f"lambda real part {lam.real} outside the strip ({lm:.6g}, {lp:.6g})")
    sig, a, b, rho = p.sigma, p.a, p.b, p.rho
    alpha0 = lam * rho / sig
    alpha1 = -lam * rho / sig * (a + sig ** 2 / 2.0)
    alpha2_sq = -lam ** 2 * (1.0 - rho ** 2) - 2.0 * b * rho * lam / sig + lam
    beta0 = (lam * rho * sig - b) / sig ** 2
    beta1 = (b - lam * rho * sig) * (a / sig ** 2 + 0.5)
    beta2_sq = alpha2_sq + b ** 2 / sig ** 2
    nu2 = cmath.sqrt(beta2_sq) / sig
    nu1 = beta1 / sig ** 2
    delta = -0.5 + beta0 / (2.0 * nu2)
    return MellinCoeffs(lam=lam, alpha0=alpha0, alpha1=alpha1,
                        alpha2_sq=alpha2_sq, beta0=beta0, beta1=beta1,
                        beta2_sq=beta2_sq, nu1=nu1, nu2=nu2, delta=delta,
                        lambda_minus=lm, lambda_plus=lp,
                        a_over_sigma2=a / sig ** 2)


def _dist_to_int(z: complex) -> float:
    return abs(z - complex(round(z.real)))


def _sanitize_eta(eta: complex, as2: float, extra=()) -> complex:
    """Nudge eta off the discrete degeneracies of the series machinery.

    Checked: 2 eta near an integer (logarithmic Tricomi / Gamma(1-bb) pole)
    and eta - a/sigma^2 (plus any caller-supplied shifts) near an integer
    (incomplete-gamma chain crossing zero). The imaginary nudge is 1e-7-sized
    so it never moves a result beyond the quadrature tolerances.
    """
    eta = complex(eta)
    for _ in range(4):
        d = _dist_to_int(2.0 * eta) / 2.0
        d = min(d, _dist_to_int(eta - as2))
        for sh in extra:
            d = min(d, _dist_to_int(eta - as2 - sh))
        if d >= _DEGENERACY_TOL:
            return eta
        eta = eta + 1j * 4.0 * _DEGENERACY_TOL
    return eta


# ---------------------------------------------------------------------------
# Green function
# ---------------------------------------------------------------------------

def green_G(v: float, y: float, lv: LaplaceVar, nu1, nu2) -> complex:
    """Morse-potential resolvent kernel.

    G(v,y) = Gamma(eta - nu1/nu2 + 1/2)/(nu2 Gamma(1+2 eta)) e^(-(v+y)/2)
             W_{nu1/nu2, eta}(2 nu2 e^(max(v,y))) M_{nu1/nu2, eta}(2 nu2 e^(min(v,y))).
    Away from y = v it solves -G''/2 + (nu2^2 e^(2y)/2 - nu1 e^y) G = -(eta^2/2) G.
    """
    nu1, nu2 = complex(nu1), complex(nu2)
    if nu2.real <= 0:
        raise DomainError("green_G needs Re(nu2) > 0")
    kappa = nu1 / nu2
    arg = lv.eta - kappa + 0.5
    pref = cmath.exp(log_gamma(arg) - log_gamma(1.0 + 2.0 * lv.eta)) / nu2
    hi, lo = (v, y) if v >= y else (y, v)
    return (pref * cmath.exp(-0.5 * (v + y))
            * whittaker_w(kappa, lv.eta, 2.0 * nu2 * math.exp(hi))
            * whittaker_m(kappa, lv.eta, 2.0 * nu2 * math.exp(lo)))


# ---------------------------------------------------------------------------
# I1: descending incomplete-gamma recurrence
# ---------------------------------------------------------------------------

def _i1_core(aa1: complex, bb: complex, c: complex, delta: complex, z0: complex,
             rtol: float, max_terms: int):
    """(Scaled, terms, err) for int_0^z0 z^(c+n-1)... summed against Phi's series.

    I1 = sum_n (aa1)_n/((bb)_n n!) i_n with
    i_n = int_0^z0 z^(c+n-1) e^(delta z) dz; the i_n satisfy
    delta i_{n+1} = z0^(c+n) e^(delta z0) - (c+n) i_n, which is run downward
    (the stable direction) from a single direct evaluation at the top index.
    """
    dz0 = delta * z0
    logz0 = cmath.log(z0)
    if abs(dz0) > _SPOT_SERIES_CAP or (-dz0).real < -8.0:
        val = graded_panel_quad(
            lambda z: np.exp((c - 1.0) * np.log(z) + delta * z)
            * _phi_vec(aa1, bb, z),
            z0, power_re=c.real, rtol=max(rtol, 1e-10))
        return Scaled(val), 0, rtol

    closed_form = abs(delta) < 1e-12
    N = 48
    while True:
        iseq = [None] * (N + 1)
        if closed_form:
            for n in range(N + 1):
                iseq[n] = Scaled.from_log((c + n) * logz0) * (1.0 / (c + n))
        else:
            top = N
            if abs(dz0) <= 6.0:
                # direct Taylor-in-delta seed
                term = Scaled.from_log((c + top) * logz0) * (1.0 / (c + top))
                acc = term
                fac = 1.0 + 0j
                base = Scaled.from_log((c + top) * logz0)
                for m in range(1, 200):
                    fac *= dz0 / m
                    piece = base * (fac / (c + top + m))
                    acc = acc + piece
                    if piece.abs_log() < math.log(1e-17) + acc.abs_log():
                        break
                iseq[top] = acc
            else:
                # gamma seed: i_N = (-delta)^(-(c+N)) gamma(c+N, -delta z0)
                g = _lower_series(c + top, -dz0)
                iseq[top] = Scaled.from_log(-(c + top) * cmath.log(-delta)) * g
            boundary = Scaled.from_log(dz0)  # e^(delta z0)
            for n in range(top - 1, -1, -1):
                iseq[n] = (Scaled.from_log((c + n) * logz0) * boundary
                           - delta * iseq[n + 1]) * (1.0 / (c + n))

        coef = 1.0 + 0j
        total = iseq[0] * coef
        small = 0
        for n in range(1, N + 1):
            coef *= (aa1 + n - 1.0) / ((bb + n - 1.0) * n)
            term = iseq[n] * coef
            total = total + term
            if term.abs_log() < math.log(rtol) + total.abs_log():
                small += 1
                if small >= 2:
                    return total, n + 1, math.exp(term.abs_log() - total.abs_log())
            else:
                small = 0
        if N >= max_terms:
            raise NonConvergenceError("i1_spot series exceeded term budget")
        N = min(2 * N, max_terms)


def i1_spot(mc: MellinCoeffs, lv: LaplaceVar, z0) -> SeriesEval:
    """I1 of the spot transform at z0 = 2 nu2 e^(v0)."""
    as2 = mc.a_over_sigma2
    eta = _sanitize_eta(lv.eta, as2)
    c = eta + as2
    if c.real <= 0:
        raise DomainError("i1_spot needs Re(eta + a/sigma^2) > 0")
    aa1 = eta - mc.nu1 / mc.nu2 + 0.5
    bb = 1.0 + 2.0 * eta
    val, n, err = _i1_core(aa1, bb, c, mc.delta, complex(z0),
                           SERIES_RTOL, SERIES_MAX_TERMS)
    return SeriesEval(val.to_complex(), max(n, 1), err)


# ---------------------------------------------------------------------------
# I2: Barnes residue series with stable incomplete-gamma chains
# ---------------------------------------------------------------------------

def _i2_series_attempt(aa1: complex, bb: complex, c: complex, delta: complex,
                       z0: complex, rtol: float, max_terms: int):
    """Residue-series evaluation of I2; returns None if it cannot reach rtol.

    Terms are coef1_n j(-n) + coef2_n j(1-bb-n) where the j's reduce to
    upper incomplete gammas Gamma(s, beta z0): series 1 walks its gamma
    argument downward from one direct evaluation (stable), series 2 upward
    (stable for growing positive real part). Outside |delta+1| > 1 the sum
    is only asymptotic, so growth of the terms triggers optimal truncation.
    """
    beta = -(delta + 1.0)
    if beta.real <= 0.02:
        return None
    x = beta * z0
    if x.real <= 0 or abs(x) > 120.0:
        return None
    logx = cmath.log(x)
    logbeta = cmath.log(beta)
    aa = aa1 + 1.0
    N = 56
    while True:
        # series 1 gammas: s_n = c - bb + 1 + n, generated downward from n=N
        s_top = c - bb + 1.0 + N
        g1 = [None] * (N + 1)
        g1[N] = _upper_core_scaled(s_top, x)
        for n in range(N - 1, -1, -1):
            sn = c - bb + 1.0 + n
            g1[n] = (g1[n + 1] - Scaled.from_log(sn * logx - x)) * (1.0 / sn)
        # series 2 gammas: s_n = c + n, generated upward
        g2 = [None] * (N + 1)
        g2[0] = _upper_core_scaled(c, x)
        for n in range(N):
            sn = c + n
            g2[n + 1] = sn * g2[n] + Scaled.from_log(sn * logx - x)

        coef1 = Scaled.from_log(log_gamma(bb - 1.0) - log_gamma(aa - 1.0))
        coef2 = Scaled.from_log(log_gamma(1.0 - bb) - log_gamma(aa - bb))
        total = (coef1 * g1[0] * Scaled.from_log(-(c - bb + 1.0) * logbeta)
                 + coef2 * g2[0] * Scaled.from_log(-c * logbeta))
        best = None  # (total_snapshot, n, rel)
        prev_mag = total.abs_log()
        grow = 0
        small = 0
        for n in range(1, N + 1):
            coef1 = coef1 * (-(aa - 1.0 - n) / (n * (bb - 1.0 - n)))
            coef2 = coef2 * (-(aa - bb - n) / (n * (-bb - n + 1.0)))
            t1 = coef1 * g1[n] * Scaled.from_log(-(c - bb + 1.0 + n) * logbeta)
            t2 = coef2 * g2[n] * Scaled.from_log(-(c + n) * logbeta)
            term = t1 + t2
            total = total + term
            mag = term.abs_log()
            rel = math.exp(mag - total.abs_log()) if not total.is_zero else 1.0
            if best is None or rel < best[2]:
                best = (total, n + 1, rel)
            if rel < rtol:
                small += 1
                if small >= 2:
                    return total, n + 1, rel
            else:
                small = 0
            if mag > prev_mag + 1e-12:
                grow += 1
                if grow >= 3:
                    # asymptotic regime entered: truncate at the recorded min
                    if best[2] <= rtol * 100.0:
                        return best
                    return None
            else:
                grow = 0
            prev_mag = mag
        if N >= min(3000, max_terms):
            return best if (best is not None and best[2] <= rtol * 100.0) else None
        N = min(2 * N, 3000)


def _i2_quad(aa1: complex, bb: complex, c: complex, delta: complex,
             z0: complex, rtol: float) -> Scaled:
    if delta.real >= -0.02:
        raise DomainError(
            f"I2 integrand does not decay: Re(delta) = {delta.real:.4g} >= 0")
    val = panelized_tail_quad(
        lambda z: np.exp((c - 1.0) * np.log(z) + delta * z) * _psi_vec(aa1, bb, z),
        z0, decay=abs(delta.real), rtol=max(rtol, 1e-10), osc=abs(delta.imag))
    return Scaled(val)


def _i2_core(aa1, bb, c, delta, z0, rtol, max_terms):
    if (delta + 1.0).real < -0.05:
        got = _i2_series_attempt(aa1, bb, c, delta, z0, rtol, max_terms)
        if got is not None:
            return got
    return _i2_quad(aa1, bb, c, delta, z0, rtol), 0, rtol


def i2_spot(mc: MellinCoeffs, lv: LaplaceVar, z0) -> SeriesEval:
    """I2 of the spot transform: residue series when Re(delta)+1 < -0.05 and
    the series reaches tolerance, vectorized quadrature otherwise."""
    as2 = mc.a_over_sigma2
    eta = _sanitize_eta(lv.eta, as2)
    c = eta + as2
    aa1 = eta - mc.nu1 / mc.nu2 + 0.5
    bb = 1.0 + 2.0 * eta
    val, n, err = _i2_core(aa1, bb, c, mc.delta, complex(z0),
                           SERIES_RTOL, SERIES_MAX_TERMS)
    return SeriesEval(val.to_complex(), max(n, 1), err)


# ---------------------------------------------------------------------------
# assembled transforms
# ---------------------------------------------------------------------------

def _g_scaled(p: ModelParams, lam: complex, pvar: complex,
              rtol: float = SERIES_RTOL) -> Scaled:
    mc = mellin_coeffs(p, lam)
    sig = p.sigma
    as2 = mc.a_over_sigma2
    lv = LaplaceVar.from_p(pvar, p)
    eta = _sanitize_eta(lv.eta, as2)
    aa1 = eta - mc.nu1 / mc.nu2 + 0.5
    bb = 1.0 + 2.0 * eta
    c = eta + as2
    if aa1.real <= 0 and _dist_to_int(aa1) < 1e-9:
        raise DomainError("double transform at a resolvent pole (bound state)")
    ev0 = math.exp(p.v0)
    z0 = 2.0 * mc.nu2 * ev0
    i1_val, _, _ = _i1_core(aa1, bb, c, mc.delta, z0, rtol, SERIES_MAX_TERMS)
    i2_val, _, _ = _i2_core(aa1, bb, c, mc.delta, z0, rtol, SERIES_MAX_TERMS)
    log_pre = ((eta + 1.0 - as2) * math.log(2.0)
               + (eta - as2) * cmath.log(mc.nu2)
               + log_gamma(aa1) - log_gamma(bb)
               - 2.0 * math.log(sig)
               + (eta - as2) * p.v0
               + (p.b / sig ** 2 - lam * p.rho / sig - mc.nu2) * ev0)
    phi0 = kummer_phi(aa1, bb, z0).value
    psi0 = _psi_scaled(aa1, bb, z0)
    return Scaled.from_log(log_pre) * (phi0 * i2_val + psi0 * i1_val)


def g_double_transform(p: ModelParams, lam, lv: LaplaceVar) -> complex:
    """g(lambda, p) = int_0^inf e^(-pt) E[(f_t/f0)^lambda] dt.

    lambda must have real part inside the Mellin strip; Re(p) > 0 for the
    transform itself (Talbot evaluates its analytic continuation off the
    positive axis). Satisfies p g(0, p) = 1, and p g(1, p) = 1 exactly when
    the forward is a martingale.
    """
    _require_alpha1(p)
    return _g_scaled(p, complex(lam), complex(lv.p)).to_complex()


def martingale_identity_residual(p: ModelParams, p_values) -> float:
    """max over p_values of |p g(0,p) - 1| (and |p g(1,p) - 1| when b >= rho sigma)."""
    _require_alpha1(p)
    worst = 0.0
    lams = [0.0]
    if p.b >= p.rho * p.sigma:
        lams.append(1.0)
    for pv in p_values:
        for lam in lams:
            g = _g_scaled(p, complex(lam), complex(pv)).to_complex()
            worst = max(worst, abs(pv * g - 1.0))
    return worst


def laplace_vol_moment(p: ModelParams, theta, lv: LaplaceVar) -> complex:
    """int_0^inf e^(-pt) E[e^(theta v_t)] dt for alpha = 1.

    Reduces to the generic I1/I2 integrals with power shift theta:
    (2 nu2)^(eta+1-theta-a/s2) / nu2 * Gamma(eta-a/s2)/(s2^... ) assembled as
    in the spot transform but with nu1/nu2 = a/sigma^2 + 1/2 fixed and
    nu2 = b/sigma^2. Finite for Re(eta + theta + a/sigma^2) > 0.
    """
    _require_alpha1(p)
    theta = complex(theta)
    sig = p.sigma
    as2 = p.a / sig ** 2
    nu2 = p.b / sig ** 2
    eta = _sanitize_eta(lv.eta, as2, extra=(theta,))
    if (eta + theta + as2).real <= 0:
        raise DomainError(
            "transform diverges: Re(eta + theta + a/sigma^2) <= 0; increase Re(p)")
    aa = 1.0 + eta - as2   # Phi/Psi parameter block: aa-1 = eta - a/sigma^2
    bb = 1.0 + 2.0 * eta
    z0 = 2.0 * nu2 * math.exp(p.v0)
    from .vswap import _i1_general, _i2_general
    iphi, _, _ = _i1_general(aa, bb, theta, z0, rtol=SERIES_RTOL)
    ipsi, _, _ = _i2_general(aa, bb, theta, z0, rtol=SERIES_RTOL)
    log_pre = ((eta + 1.0 - theta - as2) * math.log(2.0 * nu2)
               - math.log(nu2) - 2.0 * math.log(sig)
               + log_gamma(eta - as2) - log_gamma(bb)
               + (eta - as2) * p.v0)
    psi0 = _psi_scaled(aa - 1.0, bb, z0)
    phi0 = kummer_phi(aa - 1.0, bb, z0).value
    return (Scaled.from_log(log_pre) * (psi0 * iphi + phi0 * ipsi)).to_complex()


def variance_swap_alpha1(p: ModelParams, t: float, node_count: int = 24) -> float:
    """vs(t) for alpha = 1 through the Morse route (valid on Re p > 0).

    t vs(t) has Laplace transform laplace_vol_moment(theta=2, p)/p; a plain
    (unshifted) Talbot contour inverts it.
    """
    _require_alpha1(p)
    if not t > 0:
        raise DomainError("variance_swap_alpha1 needs t > 0")
    from .inversion import TalbotConfig, talbot_invert

    def F(pv):
        return laplace_vol_moment(p, 2.0, LaplaceVar.from_p(pv, p)) / pv

    inv = talbot_invert(F, t, TalbotConfig(node_count=node_count))
    return inv / t
