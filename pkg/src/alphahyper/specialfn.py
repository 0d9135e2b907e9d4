"""Complex-valued special functions and series primitives.

Everything here is built for the parameter ranges the transform machinery
actually visits: Kummer/Tricomi functions with complex parameters whose
magnitudes grow with the Laplace variable, incomplete gamma functions that
must stay entire in their first argument, and series evaluated by term
recurrences (one multiply/divide per term) rather than per-term gamma calls.

Numerical routes
----------------
* ``kummer_phi`` sums the defining Taylor series; for arguments deep in the
  left half-plane it applies the Kummer transform first so the summed series
  has no catastrophic cancellation.
* ``tricomi_psi`` holds a ladder of methods: the terminating polynomial case,
  the large-|z| asymptotic series (accepted only when its optimal truncation
  meets tolerance), the two-Kummer connection formula (only for small Re z,
  where its inherent e^z cancellation costs a bounded number of digits), and
  the Laplace-type integral representation otherwise.
* incomplete gammas use the classic series / continued-fraction pair, with
  first-argument recurrences applied in their stable direction.

All functions are pure and thread-safe.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
import scipy.special as sc
from scipy.integrate import quad

from ._scaled import Scaled
from .errors import DomainError, NonConvergenceError, PoleError

SERIES_RTOL = 1e-13
SERIES_MAX_TERMS = 10_000

_LOG_HUGE = 700.0  # ln of the largest comfortable double


@dataclass(frozen=True)
class SeriesEval:
    """Result of a truncated series: value, terms summed, |last term| added."""

    value: complex
    terms_used: int
    trunc_error: float


def _is_nonpositive_int(z: complex, tol: float = 1e-12) -> bool:
    z = complex(z)
    if abs(z.imag) > tol:
        return False
    r = round(z.real)
    return r <= 0 and abs(z.real - r) <= tol


# ---------------------------------------------------------------------------
# gamma family
# ---------------------------------------------------------------------------

def log_gamma(z) -> complex:
    """Principal branch of log Gamma(z) for complex z.

    Raises PoleError at the poles z = 0, -1, -2, ...
    """
    z = complex(z)
    if _is_nonpositive_int(z):
        raise PoleError(f"log_gamma pole at z={z}")
    return complex(sc.loggamma(z))


def _gamma(z: complex) -> complex:
    return complex(sc.gamma(complex(z)))


def _lower_series(s: complex, x: complex, rtol: float = 1e-16) -> complex:
    # gamma(s, x) = x^s e^-x sum_n x^n / (s (s+1) ... (s+n))
    term = 1.0 / s
    total = term
    for n in range(1, 1000):
        term *= x / (s + n)
        total += term
        if abs(term) < rtol * abs(total):
            break
    else:
        raise NonConvergenceError("lower incomplete gamma series stalled")
    return total * cmath.exp(s * cmath.log(x) - x)


def _upper_cf(s: complex, x: complex, rtol: float = 1e-16) -> complex:
    # Modified Lentz on the standard continued fraction; wants Re x > 0 and
    # |x| not tiny.
    tiny = 1e-300
    b = x + 1.0 - s
    c = 1.0 / tiny
    d = 1.0 / b if b != 0 else 1.0 / tiny
    h = d
    for i in range(1, 2000):
        an = -i * (i - s)
        b += 2.0
        d = an * d + b
        if d == 0:
            d = tiny
        c = b + an / c
        if c == 0:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < rtol:
            break
    else:
        raise NonConvergenceError("upper incomplete gamma continued fraction stalled")
    return cmath.exp(s * cmath.log(x) - x) * h


def _upper_core(s: complex, x: complex) -> complex:
    """Gamma(s, x) for complex s and complex x with Re x > 0."""
    if s.real > 0:
        if abs(x) < s.real + 4.0 and abs(x) < 45.0:
            return _gamma(s) - _lower_series(s, x)
        return _upper_cf(s, x)
    if abs(x) >= max(2.0, abs(s) * 0.25) and abs(x) >= 4.0:
        return _upper_cf(s, x)
    # Lift into Re > 0 and walk back down: Gamma(s,x) = (Gamma(s+1,x) - x^s e^-x)/s
    m = int(math.ceil(1.0 - s.real))
    cur = _upper_core(s + m, x)
    logx = cmath.log(x)
    for j in range(m - 1, -1, -1):
        sj = s + j
        cur = (cur - cmath.exp(sj * logx - x)) / sj
    return cur


def _upper_core_scaled(s: complex, x: complex) -> Scaled:
    """Gamma(s, x) as a Scaled value (usable when |Gamma(s,x)| overflows)."""
    if s.real > 0 and abs(x) < s.real + 4.0 and abs(x) < 45.0:
        # Gamma(s) * (1 - P(s,x)) with P the regularized lower gamma
        term = 1.0 + 0j
        total = term
        for n in range(1, 1000):
            term *= x / (s + n)
            total += term
            if abs(term) < 1e-17 * abs(total):
                break
        log_p = s * cmath.log(x) - x - complex(sc.loggamma(s + 1)) + cmath.log(total)
        one_minus_p = 1.0 - cmath.exp(log_p) if log_p.real < -0.05 else None
        if one_minus_p is not None:
            return Scaled.from_log(complex(sc.loggamma(s))) * one_minus_p
        return Scaled(_gamma(s) - _lower_series(s, x))
    if s.real > 0 or (abs(x) >= max(2.0, abs(s) * 0.25) and abs(x) >= 4.0):
        h = _upper_cf(s, x)
        return Scaled.from_log(s * cmath.log(x) - x) * h
    m = int(math.ceil(1.0 - s.real))
    cur = _upper_core_scaled(s + m, x)
    logx = cmath.log(x)
    for j in range(m - 1, -1, -1):
        sj = s + j
        cur = (cur - Scaled.from_log(sj * logx - x)) / sj
    return cur


def lower_incomplete_gamma(s, x) -> complex:
    """gamma(s, x) = int_0^x t^(s-1) e^-t dt for Re s > 0, x >= 0."""
    s = complex(s)
    if s.real <= 0:
        raise DomainError(f"lower_incomplete_gamma needs Re(s) > 0, got {s}")
    xc = complex(x)
    if xc.imag == 0 and xc.real < 0:
        raise DomainError(f"lower_incomplete_gamma needs x >= 0, got {x}")
    if xc == 0:
        return 0j
    if abs(xc) < max(s.real + 4.0, 20.0) and abs(xc) < 60.0:
        return _lower_series(s, xc)
    return _gamma(s) - _upper_cf(s, xc)


def upper_incomplete_gamma(s, x) -> complex:
    """Gamma(s, x) = int_x^inf t^(s-1) e^-t dt; entire in s for x > 0."""
    xc = complex(x)
    if xc.imag == 0 and xc.real <= 0:
        raise DomainError(f"upper_incomplete_gamma needs x > 0, got {x}")
    if xc.real <= 0:
        raise DomainError(f"upper_incomplete_gamma needs Re(x) > 0, got {x}")
    return _upper_core(complex(s), xc)


# ---------------------------------------------------------------------------
# Kummer Phi (confluent hypergeometric of the first kind)
# ---------------------------------------------------------------------------

def kummer_phi(a, b, z, rtol: float = SERIES_RTOL,
               max_terms: int = SERIES_MAX_TERMS) -> SeriesEval:
    """Phi(a, b; z) = sum_n (a)_n / ((b)_n n!) z^n.

    Terms are produced by the one-multiply recurrence
    t_{n+1} = t_n (a+n) z / ((b+n)(n+1)); summation stops once |term| drops
    below rtol * |partial| twice in a row. Deep in the left half-plane the
    Kummer transform Phi(a,b;z) = e^z Phi(b-a,b;-z) is applied first to keep
    the summed series cancellation-free.
    """
    a, b, z = complex(a), complex(b), complex(z)
    if _is_nonpositive_int(b):
        raise PoleError(f"kummer_phi pole at b={b}")
    if z.real < -40.0 and not _is_nonpositive_int(a):
        inner = kummer_phi(b - a, b, -z, rtol, max_terms)
        w = cmath.exp(z)
        return SeriesEval(w * inner.value, inner.terms_used,
                          abs(w) * inner.trunc_error)
    term = 1.0 + 0j
    total = term
    small = 0
    n = 0
    while n < max_terms:
        term *= (a + n) * z / ((b + n) * (n + 1))
        total += term
        n += 1
        if abs(term) < rtol * abs(total):
            small += 1
            if small >= 2:
                return SeriesEval(total, n + 1, abs(term))
        else:
            small = 0
    raise NonConvergenceError(
        f"kummer_phi({a}, {b}, {z}) exceeded {max_terms} terms")


def _phi_vec(a: complex, b: complex, z: np.ndarray,
             rtol: float = SERIES_RTOL,
             max_terms: int = SERIES_MAX_TERMS) -> np.ndarray:
    """kummer_phi over an array of arguments (shared a, b)."""
    z = np.asarray(z, dtype=complex)
    neg = z.real < -40.0
    out = np.empty_like(z)
    if neg.any():
        out[neg] = np.exp(z[neg]) * _phi_vec(b - a, b, -z[neg], rtol, max_terms)
    rest = ~neg
    if rest.any():
        zz = z[rest]
        term = np.ones_like(zz)
        total = term.copy()
        n = 0
        while n < max_terms:
            term = term * ((a + n) / ((b + n) * (n + 1))) * zz
            total += term
            n += 1
            if n % 8 == 0 and np.all(np.abs(term) <= rtol * np.abs(total)):
                break
        else:
            raise NonConvergenceError("_phi_vec exceeded term budget")
        out[rest] = total
    return out


# ---------------------------------------------------------------------------
# Tricomi Psi (confluent hypergeometric of the second kind)
# ---------------------------------------------------------------------------

_B_PERTURB = 2e-6j  # dodge for the logarithmic (integer-b) degenerate case


def _psi_asymptotic(a: complex, b: complex, z: complex,
                    rtol: float = 1e-12, max_terms: int = 120):
    """z^-a 2F0 series at infinity, optimally truncated.

    Returns (value, achieved_relative_error_estimate).
    """
    term = 1.0 + 0j
    total = term
    err = 1.0
    for n in range(max_terms):
        nxt = term * (a + n) * (a - b + 1.0 + n) / (-(n + 1) * z)
        if abs(nxt) >= abs(term):
            err = abs(term) / max(abs(total), 1e-300)
            break
        term = nxt
        total += term
        if abs(term) < rtol * abs(total):
            err = abs(term) / abs(total)
            break
    else:
        err = abs(term) / max(abs(total), 1e-300)
    return cmath.exp(-a * cmath.log(z)) * total, err


def _psi_asymptotic_vec(a: complex, b: complex, z: np.ndarray,
                        rtol: float = 1e-12, max_terms: int = 120):
    """Vectorized optimally-truncated asymptotic series; returns (vals, errs)."""
    term = np.ones_like(z)
    total = term.copy()
    live = np.ones(z.shape, dtype=bool)
    best = np.full(z.shape, np.inf)
    for n in range(max_terms):
        nxt = term * ((a + n) * (a - b + 1.0 + n) / (-(n + 1))) / z
        grow = np.abs(nxt) >= np.abs(term)
        live &= ~grow
        if not live.any():
            break
        term = np.where(live, nxt, term)
        total = np.where(live, total + term, total)
        rel = np.abs(term) / np.maximum(np.abs(total), 1e-300)
        best = np.where(live, np.minimum(best, rel), best)
        conv = live & (rel < rtol)
        live &= ~conv
        if not live.any():
            break
    return np.exp(-a * np.log(z)) * total, best


def _psi_terminating(a: complex, b: complex, z: complex) -> complex:
    n = int(round(-a.real))
    term = 1.0 + 0j
    total = term
    for k in range(n):
        term *= (a + k) * (a - b + 1.0 + k) / (-(k + 1) * z)
        total += term
    return cmath.exp(-a * cmath.log(z)) * total


def _psi_connection(a: complex, b: complex, z: complex,
                    max_loss: float = math.inf):
    """Two-Kummer connection value, or None if its measured cancellation
    exceeds ``max_loss`` decimal digits.

    Coefficients go through combined log-gammas: the individual gamma
    factors can overflow double even when each term is representable.
    """
    if abs(b.imag) < 1e-6 and abs(b.real - round(b.real)) < 1e-6:
        b = b + _B_PERTURB
    t1 = 0j
    t2 = 0j
    if not _is_nonpositive_int(a - b + 1.0):
        lc1 = complex(sc.loggamma(1.0 - b)) - complex(sc.loggamma(a - b + 1.0))
        t1 = cmath.exp(lc1) * kummer_phi(a, b, z).value
    if not _is_nonpositive_int(a):
        lc2 = (complex(sc.loggamma(b - 1.0)) - complex(sc.loggamma(a))
               + (1.0 - b) * cmath.log(z))
        t2 = cmath.exp(lc2) * kummer_phi(a - b + 1.0, 2.0 - b, z).value
    out = t1 + t2
    big = max(abs(t1), abs(t2))
    if big > 0 and (out == 0 or math.log10(big / abs(out)) > max_loss):
        return None
    return out


def _psi_connection_scaled(a: complex, b: complex, z: complex) -> Scaled:
    if abs(b.imag) < 1e-6 and abs(b.real - round(b.real)) < 1e-6:
        b = b + _B_PERTURB
    t1 = (Scaled.from_log(complex(sc.loggamma(1.0 - b)) - complex(sc.loggamma(a - b + 1.0)))
          * kummer_phi(a, b, z).value)
    if _is_nonpositive_int(a):
        return t1
    t2 = (Scaled.from_log(complex(sc.loggamma(b - 1.0)) - complex(sc.loggamma(a))
                          + (1.0 - b) * cmath.log(z))
          * kummer_phi(a - b + 1.0, 2.0 - b, z).value)
    return t1 + t2


def _psi_integral(a: complex, b: complex, z: complex) -> complex:
    # Psi = z^-a / Gamma(a) int_0^inf e^-u u^(a-1) (1+u/z)^(b-a-1) du, Re a > 0
    if a.real <= 0:
        # walk down from the Re > 0 region with the three-term recurrence,
        # stable in this direction because Psi grows as a decreases
        m = int(math.ceil(1.0 - a.real))
        hi2 = _psi_integral(a + m + 1.0, b, z)
        hi1 = _psi_integral(a + m, b, z)
        for j in range(m - 1, -1, -1):
            aj = a + j + 1.0
            lo = (2.0 * aj - b + z) * hi1 - aj * (aj - b + 1.0) * hi2
            hi2, hi1 = hi1, lo
        return hi1
    try:
        return complex(_psi_logtrapz(a, b, np.array([z]))[0])
    except NonConvergenceError:
        am1 = a - 1.0
        bam1 = b - a - 1.0

        def f(u):
            return math.exp(-u) * cmath.exp(am1 * math.log(u)) * (1.0 + u / z) ** bam1

        val, _ = quad(f, 0.0, np.inf, complex_func=True, limit=400,
                      epsabs=1e-300, epsrel=1e-13)
        return cmath.exp(-a * cmath.log(z)) * complex(sc.rgamma(a)) * val


def tricomi_psi(a, b, z, switch_radius: float = 30.0) -> complex:
    """Psi(a, b; z) for Re z > 0.

    Method ladder: terminating polynomial when a is a non-positive integer;
    large-|z| asymptotic series when its optimal truncation meets tolerance;
    the two-Kummer connection formula when Re z is small enough that its e^z
    cancellation is harmless; otherwise the Laplace integral representation.
    Near-integer b is perturbed off the logarithmic degenerate case by 2e-6i
    (error of order the perturbation times the local b-derivative).
    """
    a, b, z = complex(a), complex(b), complex(z)
    if z.real <= 0:
        raise DomainError(f"tricomi_psi needs Re(z) > 0, got {z}")
    if _is_nonpositive_int(a):
        return _psi_terminating(a, b, z)
    if abs(z) >= switch_radius:
        val, err = _psi_asymptotic(a, b, z)
        if err < 1e-11:
            return val
    near_int_b = abs(b.imag) < 1e-6 and abs(b.real - round(b.real)) < 1e-6
    if (z.real <= 12.0 and abs(z) - z.real <= 20.0
            and not (near_int_b and a.real > 0)):
        got = _psi_connection(a, b, z, max_loss=4.5)
        if got is not None:
            return got
    if a.real > 0:
        return complex(_psi_logtrapz(a, b, np.array([z]))[0])
    return _psi_integral(a, b, z)


def _log1p_c(w: np.ndarray) -> np.ndarray:
    out = np.log(1.0 + w)
    small = np.abs(w) < 1e-4
    if small.any():
        ws = w[small]
        out[small] = ws * (1.0 - ws * (0.5 - ws / 3.0))
    return out


def _psi_logtrapz_once(a, b, z, phi, refine: int = 1):
    """One rotated log-grid evaluation; returns (coarse, fine) trapezoids.

    Psi Gamma(a) = int_0^inf e^(-zt) t^(a-1)(1+t)^(b-a-1) dt evaluated on the
    ray t = e^(i phi) e^s. In s the t^(i Im a) oscillation has constant
    frequency, and the rotation damps the small-t oscillation by
    e^(-Im(a) phi), which is what keeps the sum's cancellation within double
    precision.
    """
    zr = z * cmath.exp(1j * phi)
    re_z_min = float(np.min(zr.real))
    re_z_max = float(np.max(zr.real))
    if re_z_min <= 0:
        raise DomainError("rotated contour leaves the decay region")
    bam1 = b - a - 1.0
    gr = max(0.0, bam1.real) + abs(bam1.imag) * abs(phi)

    lo0 = -52.0 / a.real - 4.0 - max(0.0, math.log(re_z_max))
    hi0 = math.log((90.0 + 4.0 * gr) / re_z_min + 1.0) + 2.0
    grid = np.linspace(lo0, hi0, 600)
    lse = np.log1p(np.exp(np.minimum(grid, 700.0)))
    lo, hi, peak = hi0, lo0, -math.inf
    for rz in {re_z_min, re_z_max}:
        env = a.real * grid + gr * lse - rz * np.exp(grid)
        pk = float(env.max())
        ipk = int(env.argmax())
        peak = max(peak, pk)
        right = np.flatnonzero(env[ipk:] < pk - 46.0)
        hi = max(hi, hi0 if right.size == 0 else float(grid[ipk + right[0]]))
        left = np.flatnonzero(env[:ipk + 1] < pk - 46.0)
        lo = min(lo, lo0 if left.size == 0 else float(grid[left[-1]]))

    omega = (abs(a.imag) + float(np.max(np.abs(zr.imag))) * math.exp(hi)
             + abs(bam1.imag))
    h = min(0.25, 5.0 / (26.0 + 0.8 * omega))
    pref = cmath.exp(peak - complex(sc.loggamma(a)) + 1j * a * phi)

    # evaluate on the fine (h/2) grid once; the coarse estimate reuses the
    # even-indexed points, so the self-check costs no extra evaluations
    step = 0.5 * h / refine
    s = np.arange(lo, hi + step, step)
    es = np.exp(s)
    w = cmath.exp(1j * phi) * es
    core = a * s + bam1 * _log1p_c(w) - peak
    vals = np.exp(core[None, :] - zr[:, None] * es[None, :])
    fine = step * pref * vals.sum(axis=1)
    coarse = 2.0 * step * pref * vals[:, ::2].sum(axis=1)
    return coarse, fine


def _psi_logtrapz_band(a: complex, b: complex, z: np.ndarray) -> np.ndarray:
    # the best rotation balances damping of the t^(i Im a) oscillation
    # against the (1+t)^(b-a-1) phase it re-introduces, so scan a short
    # ladder of angles; the coarse/fine gap tracks the true error well
    max_arg = float(np.max(np.abs(np.angle(z))))
    phi_room = 0.5 * math.pi - max_arg - 0.2
    phi_main = math.copysign(min(1.1, max(phi_room, 0.0)), a.imag) if a.imag else 0.0
    best_val, best_gap, best_phi = None, math.inf, 0.0
    tries = [phi_main * f for f in (1.0, 0.7, 0.45, 0.25)] + [0.0]         if phi_main else [0.0]
    for phi in tries:
        v1, v2 = _psi_logtrapz_once(a, b, z, phi)
        gap = float((np.abs(v1 - v2) / np.maximum(np.abs(v2), 1e-300)).max())
        if gap < best_gap:
            best_val, best_gap, best_phi = v2, gap, phi
        if gap < 3e-9:
            return v2
    v1, v2 = _psi_logtrapz_once(a, b, z, best_phi, refine=2)
    gap = float((np.abs(v1 - v2) / np.maximum(np.abs(v2), 1e-300)).max())
    if gap < best_gap:
        best_val, best_gap = v2, gap
    if best_gap < 1e-7:
        return best_val
    raise NonConvergenceError("psi log-trapezoid failed to settle")


def _psi_logtrapz(a: complex, b: complex, z: np.ndarray) -> np.ndarray:
    """Integral-representation Tricomi psi over a z array (Re a > 0).

    The usable contour rotation is limited by max |arg z| over the batch, so
    the batch is processed in arg(z) bands, each with its own rotation.
    When Re a is small relative to |Im a| no rotation suffices (the
    oscillatory cancellation exceeds double precision); those cases are
    lifted to a + m and walked back down the three-term a-recurrence, which
    is stable in the descending direction.
    """
    z = np.asarray(z, dtype=complex)
    if a.real <= 0 or np.any(z.real <= 0):
        raise DomainError("_psi_logtrapz needs Re z > 0 and Re a > 0")

    def banded(aa):
        args = np.angle(z)
        if args.size <= 2 or float(args.max() - args.min()) <= 0.5:
            return _psi_logtrapz_band(aa, b, z)
        out = np.empty_like(z)
        bands = np.floor(args / 0.5).astype(int)
        for tag in np.unique(bands):
            msk = bands == tag
            out[msk] = _psi_logtrapz_band(aa, b, z[msk])
        return out

    max_arg = float(np.max(np.abs(np.angle(z))))
    room = max(0.0, 0.5 * math.pi - max_arg - 0.2)
    lift = abs(a.imag) * (1.35 - min(room, 1.1)) - a.real
    m0 = int(math.ceil(lift)) + 1 if (lift > 0 and abs(a.imag) > 6.0) else 0
    escal = (0, int(math.ceil(0.4 * abs(a.imag))) + 2,
             int(math.ceil(0.8 * abs(a.imag))) + 4)
    last_err = None
    for extra in escal:
        m = m0 + extra if (m0 or extra) else 0
        try:
            if m == 0:
                return banded(a)
            hi2 = banded(a + m + 1.0)
            hi1 = banded(a + m)
            for j in range(m - 1, -1, -1):
                aj = a + j + 1.0
                lo = (2.0 * aj - b + z) * hi1 - aj * (aj - b + 1.0) * hi2
                hi2, hi1 = hi1, lo
            return hi1
        except NonConvergenceError as exc:
            last_err = exc
            continue
    raise last_err


def _psi_vec(a: complex, b: complex, z: np.ndarray,
             switch_radius: float = 30.0) -> np.ndarray:
    """tricomi_psi over an array of z (shared a, b), Re z > 0 everywhere.

    The mid-range block is evaluated through the integral representation on a
    shared generalized Gauss-Laguerre grid; the rule order is doubled until
    two orders agree, with a scalar adaptive-quadrature escape hatch for any
    stragglers.
    """
    a, b = complex(a), complex(b)
    z = np.asarray(z, dtype=complex)
    out = np.full(z.shape, np.nan + 0j)
    if np.any(z.real <= 0):
        raise DomainError("_psi_vec needs Re(z) > 0")
    if _is_nonpositive_int(a):
        return np.array([_psi_terminating(a, b, zz) for zz in z.ravel()]
                        ).reshape(z.shape)

    done = np.zeros(z.shape, dtype=bool)
    big = np.abs(z) >= switch_radius
    if big.any():
        vals, errs = _psi_asymptotic_vec(a, b, z[big])
        ok = errs < 1e-11
        idx = np.flatnonzero(big)
        out[np.unravel_index(idx[ok], z.shape)] = vals[ok]
        done[np.unravel_index(idx[ok], z.shape)] = True

    near_int_b = abs(b.imag) < 1e-6 and abs(b.real - round(b.real)) < 1e-6
    # the Kummer series behind the connection terms loses ~0.434(|z|-Re z)
    # digits for strongly complex z, so gate on that too
    conn = ((~done) & (z.real <= 12.0) & (np.abs(z) - z.real <= 20.0)
            & (not (near_int_b and a.real > 0)))
    if conn.any():
        zz = z[conn]
        bb = b + _B_PERTURB if near_int_b else b
        t1 = np.zeros_like(zz)
        t2 = np.zeros_like(zz)
        if not _is_nonpositive_int(a - bb + 1.0):
            lc1 = complex(sc.loggamma(1.0 - bb)) - complex(sc.loggamma(a - bb + 1.0))
            t1 = cmath.exp(lc1) * _phi_vec(a, bb, zz)
        if not _is_nonpositive_int(a):
            lc2 = complex(sc.loggamma(bb - 1.0)) - complex(sc.loggamma(a))
            t2 = (np.exp(lc2 + (1.0 - bb) * np.log(zz))
                  * _phi_vec(a - bb + 1.0, 2.0 - bb, zz))
        acc = t1 + t2
        big = np.maximum(np.abs(t1), np.abs(t2))
        okl = big <= 3e4 * np.abs(acc)  # < 4.5 digits of cancellation
        sel = np.flatnonzero(conn)[okl]
        out[np.unravel_index(sel, z.shape)] = acc[okl]
        done[np.unravel_index(sel, z.shape)] = True

    mid = ~done
    if mid.any():
        if a.real <= 0:
            out[mid] = [_psi_integral(a, b, zz) for zz in z[mid]]
            return out
        # the connection formula is exact wherever one of its two terms
        # dominates; keep elements whose measured cancellation loses < 5
        # digits and leave the balanced ones to the integral representation
        cand = mid & (np.abs(z) - z.real <= 20.0) & (z.real <= 120.0)
        if cand.any() and not near_int_b and not (
                _is_nonpositive_int(a - b + 1.0) or _is_nonpositive_int(a)):
            zz = z[cand]
            lt1 = (complex(sc.loggamma(1.0 - b)) - complex(sc.loggamma(a - b + 1.0))
                   + np.log(_phi_vec(a, b, zz)))
            lt2 = (complex(sc.loggamma(b - 1.0)) - complex(sc.loggamma(a))
                   + (1.0 - b) * np.log(zz) + np.log(_phi_vec(a - b + 1.0, 2.0 - b, zz)))
            mx = np.maximum(lt1.real, lt2.real)
            ssum = np.exp(lt1 - mx) + np.exp(lt2 - mx)
            # accept only where the term cancellation plus the series' own
            # complex-z loss stay well under double precision
            phi_loss = np.abs(zz) - zz.real
            okc = ((np.log(np.maximum(np.abs(ssum), 1e-300)) - phi_loss > -11.5)
                   & (mx < 690.0))
            if okc.any():
                vals = ssum[okc] * np.exp(mx[okc])
                tgt = np.flatnonzero(cand)[okc]
                out[np.unravel_index(tgt, z.shape)] = vals
                done[np.unravel_index(tgt, z.shape)] = True
        mid = ~done
        if mid.any():
            out[mid] = _psi_logtrapz(a, b, z[mid])
    return out


def _psi_scaled(a: complex, b: complex, z: complex) -> Scaled:
    """tricomi_psi as a Scaled value; survives |Psi| beyond double range."""
    a, b, z = complex(a), complex(b), complex(z)
    if z.real <= 0:
        raise DomainError(f"_psi_scaled needs Re(z) > 0, got {z}")
    # estimate the small-z magnitude Gamma(b-1)/Gamma(a) z^(1-b) to decide
    if not _is_nonpositive_int(a):
        est = (complex(sc.loggamma(b - 1.0)).real - complex(sc.loggamma(a)).real
               + ((1.0 - b) * cmath.log(z)).real)
        if est > _LOG_HUGE - 40.0 and z.real <= 12.0:
            return _psi_connection_scaled(a, b, z)
    return Scaled(tricomi_psi(a, b, z))


# ---------------------------------------------------------------------------
# Whittaker functions
# ---------------------------------------------------------------------------

def whittaker_m(kappa, eta, z) -> complex:
    """M_{kappa,eta}(z) = z^(eta+1/2) e^(-z/2) Phi(eta-kappa+1/2, 1+2 eta; z)."""
    kappa, eta, z = complex(kappa), complex(eta), complex(z)
    phi = kummer_phi(eta - kappa + 0.5, 1.0 + 2.0 * eta, z).value
    return cmath.exp((eta + 0.5) * cmath.log(z) - z / 2.0) * phi


def whittaker_w(kappa, eta, z) -> complex:
    """W_{kappa,eta}(z) = z^(eta+1/2) e^(-z/2) Psi(eta-kappa+1/2, 1+2 eta; z)."""
    kappa, eta, z = complex(kappa), complex(eta), complex(z)
    psi = tricomi_psi(eta - kappa + 0.5, 1.0 + 2.0 * eta, z)
    return cmath.exp((eta + 0.5) * cmath.log(z) - z / 2.0) * psi


# ---------------------------------------------------------------------------
# generalized hypergeometric 2F2
# ---------------------------------------------------------------------------

def generalized_hypergeometric_2f2(a1, a2, b1, b2, z,
                                   rtol: float = SERIES_RTOL,
                                   max_terms: int = SERIES_MAX_TERMS) -> SeriesEval:
    """2F2([a1, a2], [b1, b2]; z), an entire function of z."""
    a1, a2, b1, b2, z = (complex(a1), complex(a2), complex(b1), complex(b2),
                         complex(z))
    for b in (b1, b2):
        if _is_nonpositive_int(b):
            raise PoleError(f"generalized_hypergeometric_2f2 pole at b={b}")
    term = 1.0 + 0j
    total = term
    small = 0
    n = 0
    while n < max_terms:
        term *= (a1 + n) * (a2 + n) * z / ((b1 + n) * (b2 + n) * (n + 1))
        total += term
        n += 1
        if abs(term) < rtol * abs(total):
            small += 1
            if small >= 2:
                return SeriesEval(total, n + 1, abs(term))
        else:
            small = 0
    raise NonConvergenceError("generalized_hypergeometric_2f2 exceeded term budget")
