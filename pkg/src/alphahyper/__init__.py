"""Pricing engine for the alpha-hypergeometric stochastic volatility model.

    df_t = f_t e^(v_t) dw1,   dv_t = (a - b e^(alpha v_t)) dt + sigma dw2,
    d<w1, w2> = rho dt.

Exact variance-path simulation, variance-swap pricing through Green-function
Laplace transforms, martingale classification of the forward, and vanilla
call pricing for alpha = 1 via a Laplace-Mellin double transform, all
cross-checkable against the Monte Carlo oracle in :mod:`alphahyper.mc`.
"""

from .errors import (AlphaHyperError, ConfigError, ContourError, DomainError,
                     NonConvergenceError, NumericalError, PoleError,
                     StripError)
from .inversion import (MellinLineConfig, TalbotConfig, black_call,
                        call_price, implied_vol, mellin_call_transform,
                        smile, talbot_invert)
from .mc import MeanSE, SimConfig, SimStats, simulate
from .morse import (LaplaceVar, MellinCoeffs, g_double_transform, green_G,
                    i1_spot, i2_spot, laplace_vol_moment,
                    martingale_identity_residual, mellin_coeffs, mellin_strip,
                    variance_swap_alpha1)
from .process import (InvertedModel, MartingaleRule, MartingaleVerdict,
                      ModelParams, ShiryaevParams, exact_v_path,
                      inverted_model, long_term_limit, martingale_classify,
                      noiseless_variance, short_term_ev, short_term_vs,
                      to_shiryaev, vs_upper_bound_alpha2, z_moment)
from .specialfn import (SeriesEval, generalized_hypergeometric_2f2,
                        kummer_phi, log_gamma, lower_incomplete_gamma,
                        tricomi_psi, upper_incomplete_gamma, whittaker_m,
                        whittaker_w)
from .vswap import (GreenEvalParams, green_u_lambda, i1_vswap, i2_vswap,
                    lambda_star, resolvent_I, variance_swap)

__version__ = "0.1.0"

__all__ = [
    "AlphaHyperError", "ConfigError", "ContourError", "DomainError",
    "NonConvergenceError", "NumericalError", "PoleError", "StripError",
    "MellinLineConfig", "TalbotConfig", "black_call", "call_price",
    "implied_vol", "mellin_call_transform", "smile", "talbot_invert",
    "MeanSE", "SimConfig", "SimStats", "simulate",
    "LaplaceVar", "MellinCoeffs", "g_double_transform", "green_G",
    "i1_spot", "i2_spot", "laplace_vol_moment",
    "martingale_identity_residual", "mellin_coeffs", "mellin_strip",
    "variance_swap_alpha1",
    "InvertedModel", "MartingaleRule", "MartingaleVerdict", "ModelParams",
    "ShiryaevParams", "exact_v_path", "inverted_model", "long_term_limit",
    "martingale_classify", "noiseless_variance", "short_term_ev",
    "short_term_vs", "to_shiryaev", "vs_upper_bound_alpha2", "z_moment",
    "SeriesEval", "generalized_hypergeometric_2f2", "kummer_phi",
    "log_gamma", "lower_incomplete_gamma", "tricomi_psi",
    "upper_incomplete_gamma", "whittaker_m", "whittaker_w",
    "GreenEvalParams", "green_u_lambda", "i1_vswap", "i2_vswap",
    "lambda_star", "resolvent_I", "variance_swap",
]
