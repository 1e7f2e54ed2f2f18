"""Quantization cubature ``E f(X) ~ sum_i p_i f(x_i)`` with plain or dilated grids."""

import math
from dataclasses import dataclass

import numpy as np

from . import distributions as dist
from . import quadrature
from .dilation import DilationParams, dilate, dilated_weights, theta_star
from .distributions import Kind
from .errors import RegimeViolation, UnsupportedDimension, ValidationError
from .greedy import build_greedy
from .optimal import newton_lr
from .quantizer import as_grid, distortion, weights

HOLDER_SLACK = 1e-12


@dataclass(frozen=True)
class Integrand:
    """Integrand with local-Lipschitz data ``|f(x)-f(y)| <= C|x-y|(1+|x|^{b-1}+|y|^{b-1})``."""

    name: str
    func: object
    C: float
    beta: float
    normal_mean: object = None  # closed-form E f(X) for X ~ N(m, sigma^2)

    def __call__(self, x):
        return self.func(np.asarray(x, dtype=float))


def _x4_sin_normal(m, sd):
    return m ** 4 + 6 * m ** 2 * sd ** 2 + 3 * sd ** 4 + math.sin(m) * math.exp(-0.5 * sd ** 2)


def _x2_cos_normal(m, sd):
    return m ** 2 + sd ** 2 + math.cos(m) * math.exp(-0.5 * sd ** 2)


# C for x^4 + sin x: |x^4 - y^4| <= |x-y| 2(|x|^3 + |y|^3) and |x|^3 <= (1 + 3|x|^4) / 4
REGISTRY = {
    "one": Integrand("one", np.ones_like, 0.0, 1.0, lambda m, sd: 1.0),
    "x": Integrand("x", lambda x: x, 1.0, 1.0, lambda m, sd: m),
    "x4_sin": Integrand("x4_sin", lambda x: x ** 4 + np.sin(x), 2.0, 5.0, _x4_sin_normal),
    "x2_cos": Integrand("x2_cos", lambda x: x ** 2 + np.cos(x), 1.0, 2.0, _x2_cos_normal),
}


def integrand(name):
    try:
        return REGISTRY[name]
    except KeyError:
        raise ValidationError(f"unknown test function {name!r}; choose from {sorted(REGISTRY)}")


def exact_value(fn, spec):
    """``(E f(X), provenance)``: Gaussian moments in closed form, quadrature otherwise."""
    fn = integrand(fn) if isinstance(fn, str) else fn
    if spec.d != 1:
        raise UnsupportedDimension("cubature targets are 1D")
    if spec.kind is Kind.NORMAL and fn.normal_mean is not None:
        m = float(spec.param("mean")[0])
        sd = float(spec.param("std")[0])
        return float(fn.normal_mean(m, sd)), "closed form"
    dist.check_moment(spec, fn.beta)
    fam = dist.family(spec)
    lo, hi = dist.support(spec)
    cuts = sorted({lo, hi, *[b for b in dist.breakpoints(spec) if lo < b < hi]})
    if math.isinf(lo) and math.isinf(hi) and 0.0 not in cuts:
        cuts = sorted(cuts + [0.0])
    val, _ = quadrature.integrate(lambda x: fn(x) * fam.pdf(x), cuts[:-1], cuts[1:],
                                  abs_tol=1e-14, rel_tol=1e-13)
    return float(val.sum()), "quadrature"


@dataclass
class CubatureResult:
    estimate: float
    n: int
    weights: np.ndarray
    provenance: dict
    target: float = None
    abs_error: float = None


def integrate(grid, spec, fn, params=None):
    """``sum_i p_i f(x_i)``; with ``params`` the grid is dilated and weighted via :func:`dilated_weights`."""
    fn = integrand(fn) if isinstance(fn, str) else fn
    grid = as_grid(grid)
    if spec.d != 1:
        raise UnsupportedDimension("cubature is implemented in 1D")
    if params is None:
        used, w = grid, weights(grid, spec)
    else:
        used, w = dilate(grid, params), dilated_weights(grid, spec, params).weights
    estimate = float(np.dot(w, fn(used.values)))
    if not math.isfinite(estimate):
        raise ValidationError("cubature estimate is not finite")
    try:
        target, _ = exact_value(fn, spec)
    except (ValidationError, ArithmeticError):
        target = None
    err = None if target is None else abs(estimate - target)
    return CubatureResult(estimate, used.n, w, used.provenance, target, err)


@dataclass(frozen=True)
class HolderCheck:
    bound: float
    actual_error: float
    valid: bool


def holder_bound_check(grid, spec, fn, r):
    """Check ``|E f(X) - E f(X^)| <= C e_r (1 + ||X||^{b-1}_{(b-1)r'} + ||X^||^{b-1}_{(b-1)r'})``."""
    fn = integrand(fn) if isinstance(fn, str) else fn
    if r < fn.beta:
        raise RegimeViolation(f"the Holder bound needs r >= beta = {fn.beta:g}, got r = {r:g}")
    grid = as_grid(grid)
    res = integrate(grid, spec, fn)
    if res.target is None:
        raise ValidationError("the Holder check needs a known E f(X)")
    e_r = distortion(grid, spec, r).value
    k = fn.beta - 1.0
    if k == 0:
        x_term = q_term = 1.0
    else:
        p = k * r / (r - 1.0) if r > 1 else math.inf
        if math.isinf(p):
            raise RegimeViolation("beta > 1 needs r > 1 for a finite conjugate exponent")
        x_term = dist.abs_moment_1d(spec, p) ** (k / p)
        q_term = float(np.dot(res.weights, np.abs(grid.values) ** p)) ** (k / p)
    bound = fn.C * e_r * (1.0 + x_term + q_term)
    actual = res.abs_error
    return HolderCheck(bound, actual, bool(actual <= bound * (1 + HOLDER_SLACK) + HOLDER_SLACK))


COMPARE_HEADER = ("n", "estimate_std", "err_std", "estimate_dil", "err_dil", "theta_star")


def l2_grids(spec, levels, method="optimal", seed=0):
    """L^2 grids at ``levels``: Newton-optimal per level, or prefixes of one greedy sequence."""
    levels = sorted(int(n) for n in levels)
    if method == "optimal":
        return [newton_lr(spec, n, 2) for n in levels]
    if method == "greedy":
        seq = build_greedy(spec, 2, levels[-1], seed)
        return [seq.level_grid(n) for n in levels]
    raise ValidationError(f"method must be 'optimal' or 'greedy', got {method!r}")


def compare_standard_vs_dilated(spec, fn, r_eval, levels, method="optimal", seed=0, theta=None):
    """Rows ``(n, estimate_std, err_std, estimate_dil, err_dil, theta_star)``.

    The L^2 grids are dilated by ``theta_star(spec, 2, r_eval)`` about the
    distribution center unless ``theta`` is forced.
    """
    fn = integrand(fn) if isinstance(fn, str) else fn
    th = theta_star(spec, 2, r_eval) if theta is None else float(theta)
    params = DilationParams.centered(spec, th)
    rows = []
    for g in l2_grids(spec, levels, method, seed):
        std = integrate(g, spec, fn)
        dil = integrate(g, spec, fn, params)
        rows.append((g.n, std.estimate, std.abs_error, dil.estimate, dil.abs_error, th))
    return rows
