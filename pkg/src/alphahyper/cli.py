"""Command-line front end.

    alphahyper <check|vs|price|simulate> --config FILE [--out FILE]
               [--format csv|json] [--seed N] [--with-mc]
               [--strikes a,b,c] [--maturity T] [--rate r]

The config file is flat ``key = value`` text ('#' comments); command-line
flags override file values. All rates and volatilities are annualized and
times are in years. Commands are pure functions of (config, seed): the same
inputs produce byte-identical output. Exit codes: 0 success, 2 config
error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from . import inversion, mc, morse, process, vswap
from .errors import AlphaHyperError, ConfigError, NumericalError

_MODEL_KEYS = ("alpha", "a", "b", "sigma", "rho", "v0", "V0", "f0")


def _parse_config_file(path):
    values = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
                key, _, val = line.partition("=")
                values[key.strip()] = val.strip()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return values


def _get(cfg, key, cast, default=None):
    if key not in cfg or cfg[key] == "":
        return default
    try:
        if cast is bool:
            v = cfg[key].lower() if isinstance(cfg[key], str) else cfg[key]
            if v in (True, "true", "1", "yes", "on"):
                return True
            if v in (False, "false", "0", "no", "off"):
                return False
            raise ValueError(cfg[key])
        return cast(cfg[key])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"config field {key}={cfg[key]!r}: {exc}") from exc


def _build_model(cfg) -> process.ModelParams:
    missing = [k for k in ("alpha", "a", "b", "sigma", "rho") if k not in cfg]
    if "v0" not in cfg and "V0" not in cfg:
        missing.append("v0 (or V0)")
    if missing:
        raise ConfigError(f"missing model parameters: {', '.join(missing)}")
    if "v0" in cfg and "V0" in cfg:
        raise ConfigError("give either v0 or V0, not both")
    kw = dict(alpha=_get(cfg, "alpha", float), a=_get(cfg, "a", float),
              b=_get(cfg, "b", float), sigma=_get(cfg, "sigma", float),
              rho=_get(cfg, "rho", float), f0=_get(cfg, "f0", float, 1.0))
    try:
        if "V0" in cfg:
            return process.ModelParams.from_variance(V0=_get(cfg, "V0", float), **kw)
        return process.ModelParams(v0=_get(cfg, "v0", float), **kw)
    except AlphaHyperError as exc:
        raise ConfigError(str(exc)) from exc


def _parse_list(text):
    return [float(x) for x in str(text).replace(",", " ").split()]


def _fmt(x):
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        return format(x, ".12g")
    return x


def _emit(payload, columns, rows, args):
    """payload: scalar-result dict; columns/rows: optional table."""
    if args.format == "json":
        doc = dict(payload)
        if columns is not None:
            doc["table"] = [dict(zip(columns, r)) for r in rows]
        text = json.dumps(doc, indent=2, default=_fmt) + "\n"
    else:
        lines = [f"# {k} = {_fmt(v)}" for k, v in payload.items()]
        if columns is not None:
            lines.append(",".join(columns))
            for r in rows:
                lines.append(",".join(_fmt(x) if isinstance(x, str) else format(x, ".12g")
                                      for x in r))
        text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _sim_config(cfg, args, horizon):
    return mc.SimConfig(
        n_paths=_get(cfg, "n_paths", int, 100_000),
        n_steps=_get(cfg, "n_steps", int, max(1, int(round(250 * horizon)))),
        horizon=horizon,
        seed=args.seed if args.seed is not None else _get(cfg, "seed", int, 0),
        antithetic=_get(cfg, "antithetic", bool, False),
    )


def cmd_check(model, cfg, args):
    verdict = process.martingale_classify(model)
    payload = {
        "martingale": "yes" if verdict.is_martingale else "NO",
        "rule": verdict.rule.value,
    }
    try:
        lm, lp = morse.mellin_strip(model)
        payload["lambda_minus"] = lm
        payload["lambda_plus"] = lp
    except AlphaHyperError:
        pass
    if model.sigma > 0:
        sh = process.to_shiryaev(model)
        payload["lambda_star"] = vswap.lambda_star(sh.nu, model.alpha)
    if model.a > 0 and model.sigma > 0:
        payload["long_term_limit"] = process.long_term_limit(model)
    _emit(payload, None, None, args)
    return 0


def cmd_vs(model, cfg, args):
    if args.maturity is not None:
        maturities = [args.maturity]
    else:
        mats = cfg.get("maturities", cfg.get("maturity"))
        if mats is None:
            raise ConfigError("vs needs maturities (config) or --maturity")
        maturities = _parse_list(mats)
    alpha1 = abs(model.alpha - 1.0) < 1e-12
    is_a2 = abs(model.alpha - 2.0) < 1e-12
    columns = ["t", "vs_analytic", "vs_short_term"]
    if is_a2:
        columns.append("vs_bound")
    if args.with_mc:
        columns += ["vs_mc", "mc_se"]
    rows = []
    for t in maturities:
        if alpha1:
            v = morse.variance_swap_alpha1(model, t)
        else:
            v = vswap.variance_swap(model, t)
        row = [t, v, float(process.short_term_vs(model, t))]
        if is_a2:
            row.append(float(process.vs_upper_bound_alpha2(model, t)))
        if args.with_mc:
            stats = mc.simulate(model, _sim_config(cfg, args, t))
            row += [stats.vs_t.mean, stats.vs_t.se]
        rows.append(row)
    _emit({"command": "vs", "alpha": model.alpha}, columns, rows, args)
    return 0


def cmd_price(model, cfg, args):
    if abs(model.alpha - 1.0) > 1e-12:
        raise ConfigError(
            "price requires alpha = 1 (the spot transform is only available "
            "for the alpha = 1 specification)")
    if not process.martingale_classify(model).is_martingale:
        raise ConfigError("price requires martingale parameters (b >= rho sigma)")
    if args.strikes is not None:
        strikes = _parse_list(args.strikes)
    elif "strikes" in cfg:
        strikes = _parse_list(cfg["strikes"])
    else:
        raise ConfigError("price needs strikes (config) or --strikes")
    t = args.maturity if args.maturity is not None else _get(cfg, "maturity", float)
    if t is None:
        raise ConfigError("price needs maturity (config) or --maturity")
    r = args.rate if args.rate is not None else _get(cfg, "rate", float, 0.0)
    talbot = inversion.TalbotConfig(
        node_count=_get(cfg, "talbot_nodes", int, 24),
        shift=_get(cfg, "talbot_shift", float, 0.0))
    mellin = inversion.MellinLineConfig(
        line_abscissa=_get(cfg, "mellin_abscissa", float, None),
        node_count=_get(cfg, "mellin_nodes", int, 100),
        truncation_height=_get(cfg, "mellin_height", float, None))
    smile_rows = inversion.smile(model, strikes, t, r, talbot=talbot, mellin=mellin)
    columns = ["k", "price", "implied_vol"]
    if args.with_mc:
        columns += ["mc_price", "mc_se"]
        stats = mc.simulate(model, _sim_config(cfg, args, t), strikes=strikes, r=r)
    rows = []
    for k, price, iv in smile_rows:
        row = [k, price, iv]
        if args.with_mc:
            row += [stats.call[k].mean, stats.call[k].se]
        rows.append(row)
    _emit({"command": "price", "maturity": t, "rate": r}, columns, rows, args)
    return 0


def cmd_simulate(model, cfg, args):
    horizon = args.maturity if args.maturity is not None else _get(cfg, "horizon", float)
    if horizon is None:
        raise ConfigError("simulate needs horizon (config) or --maturity")
    r = args.rate if args.rate is not None else _get(cfg, "rate", float, 0.0)
    strikes = _parse_list(args.strikes) if args.strikes is not None else \
        _parse_list(cfg.get("strikes", "")) if cfg.get("strikes") else []
    scfg = _sim_config(cfg, args, horizon)
    stats = mc.simulate(model, scfg, strikes=strikes, r=r)
    payload = {
        "command": "simulate",
        "seed": scfg.seed,
        "n_paths": scfg.n_paths,
        "n_steps": scfg.n_steps,
        "horizon": scfg.horizon,
        "antithetic": scfg.antithetic,
        "n_nonfinite": stats.n_nonfinite,
        "ev_t": stats.ev_t.mean, "ev_t_se": stats.ev_t.se,
        "vs_t": stats.vs_t.mean, "vs_t_se": stats.vs_t.se,
        "ef_t": stats.ef_t.mean, "ef_t_se": stats.ef_t.se,
    }
    columns = ["k", "call", "call_se"] if strikes else None
    rows = [[k, stats.call[k].mean, stats.call[k].se] for k in strikes] if strikes else None
    _emit(payload, columns, rows, args)
    return 0


_COMMANDS = {"check": cmd_check, "vs": cmd_vs, "price": cmd_price,
             "simulate": cmd_simulate}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="alphahyper",
        description="Pricing engine for the alpha-hypergeometric "
                    "stochastic volatility model")
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True, help="key = value text file")
    parser.add_argument("--out", help="write output to this file")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--with-mc", action="store_true", dest="with_mc")
    parser.add_argument("--strikes", help="comma-separated strikes")
    parser.add_argument("--maturity", type=float, default=None)
    parser.add_argument("--rate", type=float, default=None)
    args = parser.parse_args(argv)

    try:
        cfg = _parse_config_file(args.config)
        model = _build_model(cfg)
        return _COMMANDS[args.command](model, cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except AlphaHyperError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
