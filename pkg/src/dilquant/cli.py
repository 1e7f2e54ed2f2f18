"""Command-line front end: build, transform and evaluate grids, run experiments.

Exit codes: 0 success, 2 invalid input, 3 numerical failure (a JSON
diagnostic is printed on stderr).
"""

import math
import sys
from pathlib import Path

import click

from . import analysis, cubature, dilation
from . import distributions as dist
from . import io
from .errors import NonConvergence, NumericalError, ValidationError
from .greedy import build_greedy
from .optimal import lloyd, newton_lr
from .quantizer import DistortionReport, distortion, weights

EXIT_INVALID = 2
EXIT_NUMERICAL = 3


class _Group(click.Group):
    """Maps package errors onto exit codes."""

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except ValidationError as exc:
            click.echo(f"error: {exc}", err=True)
            ctx.exit(EXIT_INVALID)
        except NumericalError as exc:
            payload = {"error": type(exc).__name__, "message": str(exc)}
            if isinstance(exc, NonConvergence):
                payload.update(residual=exc.residual, level=exc.level)
            click.echo(io.dumps(payload), err=True)
            ctx.exit(EXIT_NUMERICAL)


def _finite(x):
    return "inf" if math.isinf(x) else x


def _spec(text, d):
    return io.parse_dist(text, d)


def _build(method, spec, r, n, seed, init=None):
    if method == "greedy":
        return build_greedy(spec, r, n, seed).level_grid(n)
    if method == "lloyd":
        return lloyd(spec, n, init=init, r=r)
    if method == "newton":
        return newton_lr(spec, n, r, init=init)
    raise ValidationError(f"unknown method {method!r}")


def _grids(method, spec, r, levels, seed):
    if method == "greedy":
        seq = build_greedy(spec, r, levels[-1], seed)
        return [seq.level_grid(n) for n in levels]
    return [_build(method, spec, r, n, seed) for n in levels]


def _params(spec, theta, star, r, s, mu):
    if theta is not None and star:
        raise ValidationError("give either --theta or --star, not both")
    if star:
        if s is None or r is None:
            raise ValidationError("--star needs --s and the construction order --r")
        theta = dilation.theta_star(spec, r, s)
    if theta is None:
        return None
    if mu is None:
        return dilation.DilationParams.centered(spec, theta)
    return dilation.DilationParams(theta, (mu,) * spec.d)


def _emit(text, out):
    if out:
        Path(out).write_text(text + "\n")
    else:
        click.echo(text)


@click.group(cls=_Group)
@click.version_option(package_name="artifact")
def main():
    """Optimal, greedy and dilated quantization grids."""


dist_option = click.option("--dist", "dist_text", required=True,
                           help="Preset name, inline JSON spec, or JSON file.")
d_option = click.option("--d", default=1, show_default=True, help="Dimension for presets.")
seed_option = click.option("--seed", default=0, show_default=True, type=int)


@main.command()
@click.option("--method", type=click.Choice(["greedy", "lloyd", "newton"]), required=True)
@dist_option
@d_option
@click.option("--r", default=2.0, show_default=True, type=float)
@click.option("--n", required=True, type=int)
@seed_option
@click.option("--init", default=None, help="quantile (default), companding or an integer seed.")
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def build(method, dist_text, d, r, n, seed, init, out):
    """Build an L^r grid of size n and save it as JSON."""
    spec = _spec(dist_text, d)
    if init is not None and init.isdigit():
        init = int(init)
    grid = _build(method, spec, r, n, seed, init)
    io.save_grid(grid, out)
    click.echo(io.dumps({"out": out, "n": grid.n, "method": method, "r": r, "seed": seed}))


@main.command()
@click.option("--grid", "grid_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--theta", type=float, default=None)
@click.option("--star", is_flag=True, help="Use theta* for (--r, --s).")
@click.option("--s", type=float, default=None)
@click.option("--r", type=float, default=None, help="Construction order (default: from provenance).")
@click.option("--mu", type=float, default=None, help="Center (default: distribution center, else 0).")
@click.option("--dist", "dist_text", default=None)
@d_option
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def dilate(grid_path, theta, star, s, r, mu, dist_text, d, out):
    """Apply x -> mu + theta (x - mu) to a saved grid."""
    grid = io.load_grid(grid_path)
    prov = grid.provenance
    spec = None
    if dist_text is not None:
        spec = _spec(dist_text, d)
    elif "dist" in prov:
        spec = dist.DistributionSpec.from_json(prov["dist"])
    if r is None:
        r = prov.get("r")
    if spec is None:
        if star:
            raise ValidationError("--star needs --dist (the grid records no distribution)")
        if theta is None:
            raise ValidationError("give --theta or --star")
        params = dilation.DilationParams(theta, (0.0 if mu is None else mu,) * grid.d)
    else:
        params = _params(spec, theta, star, r, s, mu)
        if params is None:
            raise ValidationError("give --theta or --star")
    new = dilation.dilate(grid, params)
    io.save_grid(new, out)
    click.echo(io.dumps({"out": out, "theta": params.theta, "mu": list(params.mu)}))


@main.command("distortion")
@click.option("--grid", "grid_path", required=True, type=click.Path(exists=True, dir_okay=False))
@dist_option
@d_option
@click.option("--s", required=True, type=float)
@click.option("--method", type=click.Choice(["exact1d", "monte_carlo"]), default=None)
@click.option("--mc-samples", default=100_000, show_default=True, type=int)
@seed_option
@click.option("--workers", default=1, show_default=True, type=int)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def distortion_cmd(grid_path, dist_text, d, s, method, mc_samples, seed, workers, out):
    """L^s distortion of a saved grid as a CSV row."""
    spec = _spec(dist_text, d)
    rep = distortion(io.load_grid(grid_path), spec, s, method, mc_samples, seed, workers)
    if rep.seed is None:
        rep = DistortionReport(rep.r, rep.n, rep.value, rep.method, rep.stderr, None, seed)
    _emit(io.csv_text(DistortionReport.CSV_HEADER, [rep.row()]), out)


@main.command("weights")
@click.option("--grid", "grid_path", required=True, type=click.Path(exists=True, dir_okay=False))
@dist_option
@d_option
@click.option("--dilated-from", "parent_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Parent grid: weights of its dilation, by two routes.")
@click.option("--theta", type=float, default=None)
@click.option("--mu", type=float, default=None)
@click.option("--mc-samples", default=100_000, show_default=True, type=int)
@seed_option
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def weights_cmd(grid_path, dist_text, d, parent_path, theta, mu, mc_samples, seed, out):
    """Voronoi weights as CSV (index, point, weight)."""
    spec = _spec(dist_text, d)
    grid = io.load_grid(grid_path)
    if parent_path is None:
        w = weights(grid, spec, mc_samples, seed)
        rows = [(i, *map(float, p), float(wi), seed) for i, (p, wi) in enumerate(zip(grid.points, w))]
        header = ("i", *[f"x{k}" for k in range(grid.d)], "weight", "seed")
    else:
        if theta is None:
            raise ValidationError("--dilated-from needs --theta")
        params = _params(spec, theta, False, None, None, mu)
        res = dilation.dilated_weights(io.load_grid(parent_path), spec, params)
        child = dilation.dilate(io.load_grid(parent_path), params)
        rows = [(i, *map(float, p), float(a), float(b)) for i, (p, a, b)
                in enumerate(zip(child.points, res.weights, res.via_parent))]
        header = ("i", *[f"x{k}" for k in range(child.d)], "weight", "weight_via_parent")
    _emit(io.csv_text(header, rows), out)


@main.command("rate-curve")
@click.option("--method", type=click.Choice(["greedy", "lloyd", "newton"]), required=True)
@dist_option
@d_option
@click.option("--r", required=True, type=float)
@click.option("--s", required=True, type=float)
@click.option("--levels", default="2^4..2^10", show_default=True)
@click.option("--theta", type=float, default=None)
@click.option("--star", is_flag=True)
@seed_option
@click.option("--out-dir", type=click.Path(file_okay=False), default=".", show_default=True)
def rate_curve_cmd(method, dist_text, d, r, s, levels, theta, star, seed, out_dir):
    """n^{1/d} e_s over levels for L^r grids (optionally dilated)."""
    spec = _spec(dist_text, d)
    lv = io.parse_levels(levels)
    params = _params(spec, theta, star, r, s, None)
    curve = analysis.rate_curve(_grids(method, spec, r, lv, seed), spec, s, params, r, seed=seed)
    summary = {"method": method, "levels": lv, "spread": curve.spread(),
               "theta": None if params is None else params.theta}
    paths = io.write_experiment(out_dir, "rate_curve", spec, r, s, seed,
                                analysis.RateCurve.CSV_HEADER, curve.rows, summary)
    click.echo(io.dumps({**summary, "files": [str(p) for p in paths], "seed": seed}))


@main.command()
@click.option("--grid", "grid_path", required=True, type=click.Path(exists=True, dir_okay=False))
@dist_option
@click.option("--s", required=True, type=float)
@click.option("--bins", default=analysis.TV_BINS, show_default=True, type=int)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="CSV of the bins.")
def empirical(grid_path, dist_text, s, bins, out):
    """Point-count histogram against the f^{d/(d+s)} target; prints the TV distance."""
    spec = _spec(dist_text, 1)
    rep = analysis.empirical_measure_test(io.load_grid(grid_path), spec, s, bins)
    if out:
        io.write_csv(out, rep.CSV_HEADER, rep.rows())
    else:
        click.echo(io.csv_text(rep.CSV_HEADER, rep.rows()))
    click.echo(io.dumps({"tv": rep.tv, "bins": bins, "s": s}))


@main.command()
@dist_option
@click.option("--r", default=2.0, show_default=True, type=float)
@click.option("--s", default=3.0, show_default=True, type=float)
@click.option("--levels", default="255,511,1023", show_default=True)
@seed_option
@click.option("--out-dir", type=click.Path(file_okay=False), default=".", show_default=True)
def regress(dist_text, r, s, levels, seed, out_dir):
    """Slopes of the theta*-dilated L^r greedy grid against the L^s greedy grid."""
    spec = _spec(dist_text, 1)
    lv = io.parse_levels(levels)
    rows = analysis.regression_experiment(spec, r, s, lv, seed)
    th = dilation.theta_star(spec, r, s)
    summary = {"theta_star": th, "slopes": {str(n): v for n, v in rows}}
    paths = io.write_experiment(out_dir, "regress", spec, r, s, seed, ("n", "slope"), rows, summary)
    click.echo(io.dumps({**summary, "files": [str(p) for p in paths], "seed": seed}))


@main.command("integrate")
@click.option("--grid", "grid_path", required=True, type=click.Path(exists=True, dir_okay=False))
@dist_option
@click.option("--f", "fname", type=click.Choice(sorted(cubature.REGISTRY)), required=True)
@click.option("--theta", type=float, default=None, help="Integrate with the dilated grid.")
@click.option("--mu", type=float, default=None)
def integrate_cmd(grid_path, dist_text, fname, theta, mu):
    """Quantization cubature sum_i p_i f(x_i)."""
    spec = _spec(dist_text, 1)
    params = _params(spec, theta, False, None, None, mu)
    res = cubature.integrate(io.load_grid(grid_path), spec, fname, params)
    click.echo(io.dumps({"f": fname, "n": res.n, "estimate": res.estimate,
                         "target": res.target, "abs_error": res.abs_error,
                         "theta": None if params is None else params.theta}))


@main.command("compare-integration")
@dist_option
@click.option("--f", "fname", type=click.Choice(sorted(cubature.REGISTRY)), default="x4_sin",
              show_default=True)
@click.option("--r-eval", default=5.0, show_default=True, type=float)
@click.option("--levels", default="2^3..2^10", show_default=True)
@click.option("--method", type=click.Choice(["optimal", "greedy"]), default="optimal",
              show_default=True)
@click.option("--theta", type=float, default=None, help="Force theta instead of theta*.")
@seed_option
@click.option("--out-dir", type=click.Path(file_okay=False), default=".", show_default=True)
def compare_integration(dist_text, fname, r_eval, levels, method, theta, seed, out_dir):
    """Cubature error of L^2 grids against their theta*-dilations."""
    spec = _spec(dist_text, 1)
    rows = cubature.compare_standard_vs_dilated(spec, fname, r_eval, io.parse_levels(levels),
                                                method, seed, theta)
    wins = sum(1 for row in rows if row[4] < row[2])
    summary = {"f": fname, "method": method, "theta_star": rows[0][5],
               "dilated_wins": wins, "levels": len(rows)}
    paths = io.write_experiment(out_dir, f"compare_{fname}", spec, 2, r_eval, seed,
                                cubature.COMPARE_HEADER, rows, summary)
    click.echo(io.dumps({**summary, "files": [str(p) for p in paths], "seed": seed}))


@main.command()
@dist_option
@d_option
@click.option("--r", required=True, type=float)
@click.option("--s", required=True, type=float)
def info(dist_text, d, r, s):
    """theta*, beta*, admissible interval and moment restrictions as JSON."""
    spec = _spec(dist_text, d)
    out = {"dist": spec.to_json(), "r": r, "s": s}
    try:
        out["theta_star"] = dilation.theta_star(spec, r, s)
    except ValidationError as exc:
        out["theta_star"] = None
        out["theta_star_error"] = str(exc)
    if spec.kind is dist.Kind.HYPER_GAMMA:
        out["beta_star"] = dilation.beta_star(spec, r, s)
    restrictions = {"moment_bound": _finite(dist.moment_bound(spec))}
    if spec.kind is dist.Kind.HYPER_CAUCHY:
        restrictions["s_max"] = dilation.hyper_cauchy_restriction(spec, r, s)
    out["moment_restrictions"] = restrictions
    try:
        iv = dilation.admissible_interval(spec, r, s)
        out["interval"] = [iv.lower, _finite(iv.upper)]
        out["regime"] = iv.regime
    except ValidationError as exc:
        out["interval"] = None
        out["regime"] = type(exc).__name__
    click.echo(io.dumps(out))


@main.command()
@click.option("--config", required=True, type=click.Path(exists=True, dir_okay=False),
              help='JSON: {"commands": [["info", "--dist", "normal", ...], ...]}')
@click.option("--keep-going", is_flag=True, help="Run every command even after a failure.")
def campaign(config, keep_going):
    """Run a list of subcommands from a JSON campaign descriptor."""
    commands = io.read_json(config).get("commands")
    if not isinstance(commands, list) or not all(isinstance(c, list) for c in commands):
        raise ValidationError("campaign config needs a 'commands' list of argument lists")
    worst = 0
    for args in commands:
        args = [str(a) for a in args]
        click.echo(f"$ dilquant {' '.join(args)}", err=True)
        try:
            # without standalone mode click returns the exit code of ctx.exit
            ret = main.main(args, prog_name="dilquant", standalone_mode=False)
            code = ret if isinstance(ret, int) else 0
        except click.exceptions.Exit as exc:
            code = exc.exit_code
        except click.ClickException as exc:
            exc.show()
            code = exc.exit_code
        worst = max(worst, code)
        if code and not keep_going:
            break
    sys.exit(worst)


if __name__ == "__main__":
    main()
