"""Command-line front end.

Usage:
    biasedtree exact --d 3 --lambda 1 --n-max 6
    biasedtree series --d 3 --lambda 1/2 --order 20 --format json
    biasedtree sweep --d 3 --lambda-min 0.5 --lambda-max 4 --points 8
    biasedtree asymptote --d 3 --lambda 1 --n-list 100,200,800
    biasedtree simulate --d 3 --lambda 1 --paths 1000000 --max-steps 10000 --seed 42
    biasedtree validate out.csv

Exit codes: 0 success, 2 usage error, 3 capacity exceeded, 4 cross-check failure.
"""
from __future__ import annotations

import math
import secrets
import time
import warnings
from fractions import Fraction

import click

from . import exact as ex
from . import genfun as gf
from .errors import BiasedTreeError, CapacityExceeded
from .exact import (
    convolve_first_return,
    first_return_catalan,
    first_return_dp,
    pn_return_dp,
)
from .model import Regime, WalkParams, make_params
from .records import (
    SchemaError,
    fmt_float,
    fmt_log,
    fmt_rational,
    fmt_scaled,
    make_record,
    render,
    validate_text,
)

EXIT_USAGE = 2
EXIT_CAPACITY = 3
EXIT_CROSS_CHECK = 4

# relative tolerance for float-mode cross-checks between independent routes
FLOAT_CHECK_RTOL = 1e-9


class CrossCheckFailed(click.ClickException):
    exit_code = EXIT_CROSS_CHECK


class CapacityError(click.ClickException):
    exit_code = EXIT_CAPACITY


def _params(d: int, lam: str, precision: str = "rational") -> WalkParams:
    try:
        params = make_params(d, lam)
    except BiasedTreeError as exc:
        raise click.BadParameter(str(exc)) from exc
    if precision == "float":
        params = WalkParams(params.d, float(params.lam))
    return params


def _params_echo(params: WalkParams) -> dict:
    return {"d": params.d, "lambda": params.lambda_str(), "regime": params.regime.value}


def _emit(ctx: click.Context, command: str, params: dict, rows: list, metadata: dict) -> None:
    opts = ctx.obj
    if opts.get("timing"):
        metadata = {**metadata, "runtime_seconds": round(time.perf_counter() - opts["t0"], 6)}
    record = make_record(command, params, rows, metadata)
    with click.open_file(opts["out"], "w", encoding="utf-8") as fh:
        fh.write(render(record, opts["format"]))


def _common(func):
    func = click.option("--timing", is_flag=True, help="Add wall-clock runtime to metadata (breaks byte-identical output).")(func)
    func = click.option("--out", default="-", show_default=True, help="Output path; '-' for stdout.")(func)
    func = click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True)(func)
    return func


def _setup(ctx: click.Context, fmt: str, out: str, timing: bool) -> None:
    ctx.obj = {"format": fmt, "out": out, "timing": timing, "t0": time.perf_counter()}


def _same(a, b, rational: bool) -> bool:
    if rational:
        return a == b
    return math.isclose(a, b, rel_tol=FLOAT_CHECK_RTOL, abs_tol=0.0)


def _log_close(l1: float, l2: float) -> bool:
    """Float-mode agreement of two log-probabilities (``-inf`` means zero)."""
    if l1 == -math.inf or l2 == -math.inf:
        return l1 == l2
    return abs(l1 - l2) <= FLOAT_CHECK_RTOL * max(1.0, abs(l1))


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
def cli():
    """Return probabilities, generating functions and spectral radius of the
    lambda-biased random walk on the d-regular tree."""
    warnings.filterwarnings("ignore", message=".*TBB.*")


@cli.command()
@click.option("--d", "d", type=int, required=True, help="Tree degree (>= 2).")
@click.option("--lambda", "lam", required=True, help="Bias, e.g. 1, 3/2 or 0.25.")
@click.option("--n-max", type=click.IntRange(min=2), required=True)
@click.option("--precision", type=click.Choice(["rational", "float"]), default="rational", show_default=True)
@_common
@click.pass_context
def exact(ctx, d, lam, n_max, precision, fmt, out, timing):
    """Exact p^(n) and f^(n) by DP, the Catalan form and the renewal convolution."""
    _setup(ctx, fmt, out, timing)
    params = _params(d, lam, precision)
    arithmetic = "rational" if precision == "rational" else "scaled_float"
    try:
        p = pn_return_dp(params, n_max, arithmetic)
        f = first_return_dp(params, n_max, arithmetic)
    except CapacityExceeded as exc:
        raise CapacityError(str(exc)) from exc
    conv = convolve_first_return(f)
    rational = precision == "rational"

    rows = []
    for n in range(n_max + 1):
        if n >= 2 and n % 2 == 0:
            cat = first_return_catalan(params, n // 2, arithmetic)
            log_cat = ex.log_first_return_catalan(params, n // 2)
        else:
            cat = Fraction(0) if rational else 0.0
            log_cat = -math.inf
        if rational:
            ok_f = f[n] == cat
            ok_p = p[n] == conv[n]
            row = {
                "n": n,
                "p_exact": fmt_rational(p[n]),
                "f_exact": fmt_rational(f[n]),
                "f_catalan": fmt_rational(cat),
                "p_from_convolution": fmt_rational(conv[n]),
            }
        else:
            ok_f = _log_close(f.log(n), log_cat)
            ok_p = _log_close(p.log(n), conv.log(n))
            row = {
                "n": n,
                "p_exact": fmt_scaled(p.values[n], p.log_scale[n]),
                "f_exact": fmt_scaled(f.values[n], f.log_scale[n]),
                "f_catalan": fmt_log(log_cat),
                "p_from_convolution": fmt_scaled(conv.values[n], conv.log_scale[n]),
            }
        if not (ok_f and ok_p):
            which = "first-return DP vs Catalan" if not ok_f else "step-return DP vs convolution"
            raise CrossCheckFailed(f"cross-check failed at n={n}: {which}")
        rows.append(row)
    meta = {"precision": precision, "cross_checks": "passed"}
    if not rational:
        meta["float_check_rtol"] = FLOAT_CHECK_RTOL
    _emit(ctx, "exact", _params_echo(params), rows, meta)


@cli.command()
@click.option("--d", "d", type=int, required=True)
@click.option("--lambda", "lam", required=True)
@click.option("--order", type=click.IntRange(min=0), required=True)
@click.option("--precision", type=click.Choice(["rational", "float"]), default="rational", show_default=True)
@_common
@click.pass_context
def series(ctx, d, lam, order, precision, fmt, out, timing):
    """Power-series coefficients of U(z) and G(z), checked against the DP."""
    _setup(ctx, fmt, out, timing)
    params = _params(d, lam, precision)
    rational = precision == "rational"
    arithmetic = "rational" if rational else "scaled_float"
    u = gf.series_u(params, order)
    g = gf.series_g(params, order)
    try:
        p = pn_return_dp(params, order, arithmetic)
    except CapacityExceeded as exc:
        raise CapacityError(str(exc)) from exc
    fmt_value = fmt_rational if rational else fmt_float
    rows = []
    for k in range(order + 1):
        if k >= 2 and k % 2 == 0:
            cat = first_return_catalan(params, k // 2, arithmetic)
        else:
            cat = Fraction(0) if rational else 0.0
        pk = p[k]
        if not (_same(u[k], cat, rational) and _same(g[k], pk, rational)):
            raise CrossCheckFailed(f"series coefficient mismatch at power {k}")
        rows.append(
            {
                "power": k,
                "u_coef": fmt_value(u[k]),
                "g_coef": fmt_value(g[k]),
                "f_catalan": fmt_value(cat),
                "p_dp": fmt_value(pk),
            }
        )
    _emit(ctx, "series", _params_echo(params), rows, {"precision": precision, "cross_checks": "passed"})


@cli.command()
@click.option("--d", "d", type=int, required=True)
@click.option("--lambda-min", required=True)
@click.option("--lambda-max", required=True)
@click.option("--points", type=click.IntRange(min=2), default=50, show_default=True)
@click.option("--precision", type=click.Choice(["rational", "float"]), default="float", show_default=True)
@_common
@click.pass_context
def sweep(ctx, d, lambda_min, lambda_max, points, precision, fmt, out, timing):
    """Spectral radius and return probability on an evenly spaced lambda grid."""
    _setup(ctx, fmt, out, timing)
    lo = _params(d, lambda_min).lam
    hi = _params(d, lambda_max).lam
    if not lo < hi:
        raise click.BadParameter("need lambda-min < lambda-max", param_hint="--lambda-min")
    step = (hi - lo) / (points - 1)
    rows = []
    for i in range(points):
        params = make_params(d, lo + i * step)
        ret = gf.return_probability(params)
        rows.append(
            {
                "lambda": fmt_rational(params.lam) if precision == "rational" else float(params.lam),
                "rho": gf.spectral_radius(params),
                "regime": params.regime.value,
                "return_probability": fmt_rational(ret) if precision == "rational" else float(ret),
            }
        )
    echo = {"d": d, "lambda_min": str(lo), "lambda_max": str(hi), "points": points}
    _emit(ctx, "sweep", echo, rows, {"precision": precision, "critical_lambda": d - 1})


def _parse_n_list(text: str) -> list:
    try:
        values = sorted({int(tok) for tok in text.replace(" ", "").split(",") if tok})
    except ValueError:
        raise click.BadParameter(f"not a comma-separated integer list: {text!r}", param_hint="--n-list")
    if not values or values[0] < 1:
        raise click.BadParameter("n values must be >= 1", param_hint="--n-list")
    return values


@cli.command()
@click.option("--d", "d", type=int, required=True)
@click.option("--lambda", "lam", required=True)
@click.option("--n-list", required=True, help="Comma-separated n values; rows describe step 2n.")
@_common
@click.pass_context
def asymptote(ctx, d, lam, n_list, fmt, out, timing):
    """Exact 2n-step probabilities against their leading-order asymptotics."""
    _setup(ctx, fmt, out, timing)
    params = _params(d, lam)
    ns = _parse_n_list(n_list)
    meta = {"precision": "float"}
    log_p_exact = None
    if params.regime is Regime.RECURRENT:
        msg = "n-step return asymptotic not covered for lambda > d - 1; p columns omitted"
        click.echo(f"warning: {msg}", err=True)
        meta["warning"] = msg
    elif params.regime is Regime.CRITICAL:
        log_p_exact = {n: ex.log_central_binomial_return(n) for n in ns}
        meta["p_exact_method"] = "central binomial"
    else:
        table = pn_return_dp(params, 2 * ns[-1], "scaled_float")
        log_p_exact = {n: table.log(2 * n) for n in ns}
        meta["p_exact_method"] = "scaled-float DP"

    rows = []
    for n in ns:
        log_f = ex.log_first_return_catalan(params, n)
        log_fa = gf.log_f_asymptotic(params, n)
        row = {"n": n}
        if log_p_exact is not None:
            log_pa = gf.log_p_asymptotic(params, n)
            row.update(
                p_exact=fmt_log(log_p_exact[n]),
                p_asym=fmt_log(log_pa),
                ratio_p=math.exp(log_p_exact[n] - log_pa),
            )
        row.update(f_exact=fmt_log(log_f), f_asym=fmt_log(log_fa), ratio_f=math.exp(log_f - log_fa))
        rows.append(row)
    _emit(ctx, "asymptote", _params_echo(params), rows, meta)


@cli.command()
@click.option("--d", "d", type=int, required=True)
@click.option("--lambda", "lam", required=True)
@click.option("--paths", type=click.IntRange(min=1), default=100_000, show_default=True)
@click.option("--max-steps", type=click.IntRange(min=2), default=10_000, show_default=True)
@click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=None, help="Master seed; random (and echoed) if omitted.")
@click.option("--bins", type=click.IntRange(min=0), default=5, show_default=True, help="Report first-return and n-step rows for steps 2..2*bins.")
@_common
@click.pass_context
def simulate(ctx, d, lam, paths, max_steps, seed, bins, fmt, out, timing):
    """Monte Carlo estimates with exact references and z-scores."""
    from .montecarlo import RNG_NAME, SimConfig, estimate_pn_return, simulate_first_return

    _setup(ctx, fmt, out, timing)
    if max_steps % 2:
        raise click.BadParameter("must be even", param_hint="--max-steps")
    params = _params(d, lam)
    if seed is None:
        seed = secrets.randbits(64)
    config = SimConfig(params, paths, max_steps, seed)
    result = simulate_first_return(config)
    est = result.returned

    def row(quantity, step, mc, exact_value):
        return {
            "quantity": quantity,
            "step": step,
            "estimate": mc.estimate,
            "std_error": mc.std_error,
            "exact": exact_value,
            "z_score": mc.z_score(exact_value),
        }

    total = float(gf.return_probability(params))
    within = ex.first_return_partial_sum(params, max_steps)
    rows = [row("return_probability", None, est, total), row("return_within_horizon", max_steps, est, within)]
    top = min(2 * bins, max_steps)
    p_exact = pn_return_dp(params, max(top, 2), "scaled_float") if top >= 2 else None
    for step in range(2, top + 1, 2):
        rows.append(row("first_return", step, result.mass(step), result.exact_mass(step)))
    for step in range(2, top + 1, 2):
        rows.append(row("step_return", step, estimate_pn_return(config, step), p_exact[step]))
    meta = {
        "seed": seed,
        "rng": RNG_NAME,
        "paths": paths,
        "max_steps": max_steps,
        "truncated_fraction": est.truncated_fraction,
    }
    _emit(ctx, "simulate", _params_echo(params), rows, meta)


@cli.command()
@click.argument("path", type=click.File("r", encoding="utf-8"), default="-")
def validate(path):
    """Check that a CSV or JSON table produced by this tool matches its schema."""
    try:
        record = validate_text(path.read())
    except SchemaError as exc:
        raise click.ClickException(f"invalid record: {exc}")
    click.echo(f"ok: {record['command']} ({len(record['rows'])} rows)")


def main(argv=None):
    return cli.main(args=argv, prog_name="biasedtree")


if __name__ == "__main__":
    main()
