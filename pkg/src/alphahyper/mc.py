"""Monte Carlo oracle for the joint (v, f) dynamics.

The log-volatility path is computed from its pathwise-exact representation
(no Euler bias in v beyond the trapezoid quadrature of the inner time
integral), while the forward evolves in log space with correlated
increments w1 = rho w2 + sqrt(1-rho^2) w_perp.

Randomness comes from the counter-based Philox generator: block k of paths
uses Philox(seed).jumped(k+1), Gaussians are produced by inverse CDF, and
per-block partial sums are merged in block order, so results are
bit-identical across runs and worker counts.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, Sequence, Tuple

import numpy as np
from scipy.special import ndtri

from .errors import DomainError
from .process import ModelParams

_BLOCK = 16384


@dataclass(frozen=True)
class SimConfig:
    n_paths: int
    n_steps: int
    horizon: float
    seed: int = 0
    antithetic: bool = False

    def __post_init__(self):
        if self.n_paths < 2:
            raise DomainError("n_paths must be >= 2")
        if self.n_steps < 1:
            raise DomainError("n_steps must be >= 1")
        if not self.horizon > 0:
            raise DomainError("horizon must be positive")
        if self.antithetic and self.n_paths % 2 != 0:
            raise DomainError("antithetic sampling needs an even n_paths")


@dataclass(frozen=True)
class MeanSE:
    mean: float
    se: float


@dataclass(frozen=True)
class SimStats:
    """Estimates at the horizon: terminal variance, running variance-swap
    rate, terminal forward, and discounted call payoffs per strike.

    Standard errors are sample-std/sqrt(n). Paths whose forward overflowed
    (possible in non-martingale parameter regions) are excluded from the
    statistics and counted in n_nonfinite.
    """

    ev_t: MeanSE
    vs_t: MeanSE
    ef_t: MeanSE
    call: Dict[float, MeanSE]
    n_paths: int
    n_nonfinite: int


def _worker_count() -> int:
    env = os.environ.get("ALPHAHYPER_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise DomainError(f"ALPHAHYPER_THREADS must be an integer, got {env!r}")
    return min(8, os.cpu_count() or 1)


def _block_sizes(n_paths: int, antithetic: bool):
    sizes = []
    left = n_paths
    while left > 0:
        m = min(_BLOCK, left)
        if antithetic and m % 2 == 1:
            m -= 1  # cannot happen for even n_paths, kept for safety
        sizes.append(m)
        left -= m
    return sizes


def _simulate_block(p: ModelParams, cfg: SimConfig, strikes: Sequence[float],
                    r: float, block_index: int, m: int):
    gen = np.random.Generator(np.random.Philox(key=cfg.seed).jumped(block_index + 1))
    dt = cfg.horizon / cfg.n_steps
    sqdt = math.sqrt(dt)
    rho_c = math.sqrt(max(0.0, 1.0 - p.rho ** 2))
    v0a = p.V0 ** (p.alpha / 2.0)

    W2 = np.zeros(m)
    T = np.zeros(m)
    g_prev = np.ones(m)
    v = np.full(m, p.v0)
    V = np.full(m, p.V0)
    lnf = np.full(m, math.log(p.f0))
    vs_acc = np.zeros(m)

    for i in range(cfg.n_steps):
        if cfg.antithetic:
            u = gen.random((2, m // 2))
            z = ndtri(u)
            z = np.concatenate([z, -z], axis=1)
        else:
            u = gen.random((2, m))
            z = ndtri(u)
        dw2 = sqdt * z[0]
        dwp = sqdt * z[1]
        lnf += -0.5 * V * dt + np.exp(v) * (p.rho * dw2 + rho_c * dwp)
        W2 += dw2
        t_next = (i + 1) * dt
        g_next = np.exp(p.alpha * (p.a * t_next + p.sigma * W2))
        T += 0.5 * dt * (g_prev + g_next)
        g_prev = g_next
        v = p.v0 + p.a * t_next + p.sigma * W2 - np.log1p(p.alpha * p.b * v0a * T) / p.alpha
        V_next = np.exp(2.0 * v)
        vs_acc += 0.5 * dt * (V + V_next)
        V = V_next

    fT = np.exp(lnf)
    vsbar = vs_acc / cfg.horizon
    finite = np.isfinite(fT) & np.isfinite(V) & np.isfinite(vsbar)
    n_bad = int(m - finite.sum())
    if n_bad:
        fT, V, vsbar = fT[finite], V[finite], vsbar[finite]
    disc = math.exp(-r * cfg.horizon)
    samples = [V, vsbar, fT]
    for k in strikes:
        samples.append(disc * np.maximum(fT - k, 0.0))
    sums = np.array([s.sum() for s in samples])
    sqsums = np.array([np.square(s).sum() for s in samples])
    return len(fT), n_bad, sums, sqsums


def simulate(p: ModelParams, cfg: SimConfig, strikes: Sequence[float] = (),
             r: float = 0.0) -> SimStats:
    """Estimate E[V_t], vs(t), E[f_t] and call prices at t = cfg.horizon.

    Reproducible bit-for-bit for a fixed seed regardless of the worker
    count (set ALPHAHYPER_THREADS to cap workers). Antithetic pairs share
    the magnitudes of all increments.
    """
    strikes = [float(k) for k in strikes]
    sizes = _block_sizes(cfg.n_paths, cfg.antithetic)

    def run(args):
        idx, m = args
        return _simulate_block(p, cfg, strikes, r, idx, m)

    jobs = list(enumerate(sizes))
    workers = _worker_count()
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(run, jobs))
    else:
        parts = [run(j) for j in jobs]

    n_used = sum(pt[0] for pt in parts)
    n_bad = sum(pt[1] for pt in parts)
    if n_used < 2:
        raise DomainError("fewer than 2 finite paths; parameters explode")
    sums = np.sum([pt[2] for pt in parts], axis=0)
    sqsums = np.sum([pt[3] for pt in parts], axis=0)

    def stat(i: int) -> MeanSE:
        mean = sums[i] / n_used
        var = max(0.0, (sqsums[i] - n_used * mean * mean) / (n_used - 1))
        return MeanSE(float(mean), float(math.sqrt(var / n_used)))

    calls = {k: stat(3 + j) for j, k in enumerate(strikes)}
    return SimStats(ev_t=stat(0), vs_t=stat(1), ef_t=stat(2), call=calls,
                    n_paths=n_used, n_nonfinite=n_bad)
