"""Stationary (locally L^r-optimal) 1D quantizers.

``lloyd`` is the fixed-point iteration ``x_i <- center of cell i`` (cell mean
for r = 2, cell median for r = 1). ``newton_lr`` solves the first-order
conditions

    G_i(x) = int_{C_i} r sign(x_i - x) |x_i - x|^(r-1) f(x) dx = 0

with a damped Newton method; the Jacobian of ``G`` is tridiagonal because a
point only interacts with its two neighbours through the shared midpoints.
"""

import numpy as np
from scipy import linalg

from . import distributions as dist
from .errors import NonConvergence, SingularJacobian, UnsupportedDimension, ValidationError
from .quadrature import integrate_pieces
from .quantizer import Grid, as_grid, cell_integrals, cell_masses, distortion_power_1d

REL_ONLY = 1e-300  # absolute tolerance that leaves the relative criterion in charge


def quantile_grid(spec, n):
    """``F^{-1}((2i - 1) / (2n))``, i = 1..n."""
    return dist.quantile(spec, (2.0 * np.arange(1, n + 1) - 1.0) / (2.0 * n))


def companding_grid(spec, n, r):
    """Quantile grid of the law with density proportional to ``f^{1/(1+r)}``.

    This is the asymptotic point density of L^r-optimal quantizers, hence a
    starting point close to the optimum for large ``n``.
    """
    return quantile_grid(dist.powered(spec, 1.0 / (1.0 + r)), n)


def initial_points(spec, n, r, init):
    if init is None or (isinstance(init, str) and init == "quantile"):
        pts = quantile_grid(spec, n)
    elif isinstance(init, str) and init == "companding":
        pts = companding_grid(spec, n, r)
    elif isinstance(init, (int, np.integer)):
        pts = np.sort(np.unique(dist.sample(spec, n, int(init))))
    else:
        pts = np.sort(np.asarray(as_grid(init).values, dtype=float))
    if len(pts) != n or np.any(np.diff(pts) <= 0):
        raise ValidationError(f"initial grid must have {n} distinct points")
    return pts


def _check(spec, n):
    if spec.d != 1:
        raise UnsupportedDimension("optimal grids are only built in 1D")
    if n < 1:
        raise ValidationError("n must be >= 1")


def cell_centers(values, spec, r):
    """Minimizer of ``a -> int_{C_i} |x - a|^r f`` in each cell: mean (r=2) or median (r=1)."""
    if r == 2:
        mass = cell_masses(values, spec)
        first = cell_integrals(values, spec, lambda x, c: x - c, tol=REL_ONLY)
        return values + first / mass
    if r == 1:
        edges = np.concatenate([[-np.inf], 0.5 * (values[1:] + values[:-1]), [np.inf]])
        fam = dist.family(spec)
        lo_c, hi_c = fam.cdf(edges[:-1]), fam.cdf(edges[1:])
        lo_s, hi_s = fam.sf(edges[:-1]), fam.sf(edges[1:])
        upper = 0.5 * (lo_c + hi_c) > 0.5
        out = np.where(upper, fam.isf(np.clip(0.5 * (lo_s + hi_s), 1e-300, 0.5)),
                       fam.quantile(np.clip(0.5 * (lo_c + hi_c), 0.0, 0.5)))
        return np.asarray(out, dtype=float)
    raise ValidationError("lloyd supports r = 1 (median) and r = 2 (mean); use newton_lr otherwise")


def lloyd(spec, n, init=None, max_iter=10_000, tol=1e-10, r=2, callback=None):
    """Lloyd fixed-point iteration on exact 1D cells.

    Stops when the largest point movement is below ``tol``. ``callback`` is
    called as ``callback(iteration, points, distortion_r_power)`` before
    every update (used to verify monotone descent).
    """
    _check(spec, n)
    dist.check_moment(spec, r)
    x = initial_points(spec, n, r, init)
    residual = np.inf
    for it in range(max_iter):
        if callback is not None:
            callback(it, x.copy(), distortion_power_1d(x, spec, r))
        new = cell_centers(x, spec, r)
        residual = float(np.max(np.abs(new - x)))
        x = np.sort(new)
        if residual < tol:
            break
    else:
        raise NonConvergence(f"lloyd did not converge in {max_iter} iterations "
                             f"(residual {residual:.3g})", residual=residual)
    final = float(np.max(np.abs(cell_centers(x, spec, r) - x)))
    if final >= 10 * tol:
        raise NonConvergence(f"lloyd stationarity residual {final:.3g} above {10 * tol:g}",
                             residual=final)
    return Grid(x, {"method": "lloyd", "r": r, "n": n, "iterations": it + 1,
                    "residual": final, "dist": spec.to_json()})


def gradient(values, spec, r):
    """``G_i`` and the cell masses."""
    g = cell_integrals(values, spec,
                       lambda x, c: r * np.sign(c - x) * np.abs(c - x) ** (r - 1), tol=REL_ONLY)
    return g, cell_masses(values, spec)


def jacobian_bands(values, spec, r, mass):
    """Tridiagonal Jacobian of ``G`` in ``solve_banded`` layout (3, n)."""
    n = len(values)
    fam = dist.family(spec)
    if r == 2:
        inner = 2.0 * mass
    elif r > 2:
        inner = cell_integrals(values, spec,
                               lambda x, c: r * (r - 1) * np.abs(c - x) ** (r - 2), tol=REL_ONLY)
    else:
        inner = _inner_difference(values, spec, r)
    h = np.diff(values)
    mids = 0.5 * (values[1:] + values[:-1])
    couple = 0.5 * r * (0.5 * h) ** (r - 1) * fam.pdf(mids)  # one per midpoint
    diag = inner.copy()
    diag[:-1] -= couple
    diag[1:] -= couple
    bands = np.zeros((3, n))
    bands[0, 1:] = -couple  # dG_i / dx_{i+1}
    bands[1] = diag
    bands[2, :-1] = -couple  # dG_{i+1} / dx_i
    return bands


def _fixed_cell_gradient(values, centers, spec, r):
    """``int_{C_i} r sign(c_i - x) |c_i - x|^(r-1) f`` with the cells of ``values`` held fixed."""
    lo, hi = dist.support(spec)
    edges = np.concatenate([[-np.inf], 0.5 * (values[1:] + values[:-1]), [np.inf]])
    cell_lo = np.clip(edges[:-1], lo, hi)
    cell_hi = np.clip(edges[1:], lo, hi)
    cols = [cell_lo, centers] + [np.full(len(values), bp) for bp in dist.breakpoints(spec)]
    inner = np.clip(np.column_stack(cols), cell_lo[:, None], cell_hi[:, None])
    cuts = np.sort(np.column_stack([inner, cell_hi]), axis=1)
    fam = dist.family(spec)
    val, _ = integrate_pieces(
        lambda x, c: r * np.sign(c - x) * np.abs(c - x) ** (r - 1) * fam.pdf(x),
        cuts, args=(centers,), abs_tol=REL_ONLY, rel_tol=1e-13)
    return val


def _inner_difference(values, spec, r):
    # for 1 < r < 2 the kernel |c - x|^(r-2) is singular at the grid point,
    # so the fixed-cell derivative is taken by a central difference instead
    gaps = np.diff(values)
    scale = np.minimum(np.concatenate([gaps, [np.inf]]), np.concatenate([[np.inf], gaps]))
    if len(values) == 1:
        scale = np.array([max(abs(values[0]), 1.0)])
    h = 1e-6 * scale
    plus = _fixed_cell_gradient(values, values + h, spec, r)
    minus = _fixed_cell_gradient(values, values - h, spec, r)
    return (plus - minus) / (2.0 * h)


def stationarity_residual(values, spec, r):
    """Sup-norm of ``G_i / (r P(C_i))``; for r = 2 this is ``max |x_i - centroid_i|``."""
    g, mass = gradient(values, spec, r)
    return float(np.max(np.abs(g / (r * mass))))


def _solve(bands, rhs):
    out = linalg.solve_banded((1, 1), bands, rhs)
    if not np.all(np.isfinite(out)):
        raise linalg.LinAlgError("non-finite Newton step")
    return out


def newton_lr(spec, n, r, init=None, max_iter=200, tol=1e-9, damping=1.0):
    """Damped Newton solve of the L^r stationarity system (1D, r > 1).

    A step is accepted when it keeps the points ordered and decreases either
    the distortion or the stationarity residual; otherwise it is halved. When
    the Newton direction is not a descent direction the Lloyd-type step
    ``-G_i / (r P(C_i))`` is used instead.
    """
    _check(spec, n)
    if r <= 1:
        raise ValidationError("newton_lr requires r > 1 (the criterion is not smooth for r <= 1)")
    dist.check_moment(spec, r)
    x = initial_points(spec, n, r, init)
    g, mass = gradient(x, spec, r)
    res = float(np.max(np.abs(g / (r * mass))))
    power = distortion_power_1d(x, spec, r)
    it = 0
    while res >= tol:
        if it >= max_iter:
            raise NonConvergence(f"newton_lr did not converge in {max_iter} iterations "
                                 f"(residual {res:.3g})", residual=res)
        it += 1
        bands = jacobian_bands(x, spec, r, mass)
        lam = damping
        try:
            step = _solve(bands, -g)
        except (linalg.LinAlgError, ValueError):
            # retry once with a diagonal shift and halved damping
            shifted = bands.copy()
            shifted[1] += 1e-8 * np.max(np.abs(bands[1]))
            lam = 0.5 * damping
            try:
                step = _solve(shifted, -g)
            except (linalg.LinAlgError, ValueError) as exc:
                raise SingularJacobian(f"singular Jacobian at iteration {it}") from exc
        if float(np.dot(g, step)) >= 0:
            # indefinite Jacobian: fall back to the Lloyd-type step (exact Lloyd for r = 2)
            step = -g / (r * mass)
            lam = 1.0
        for _ in range(60):
            trial = x + lam * step
            if np.all(np.diff(trial) > 0):
                g_t, mass_t = gradient(trial, spec, r)
                res_t = float(np.max(np.abs(g_t / (r * mass_t))))
                power_t = distortion_power_1d(trial, spec, r)
                if power_t < power or res_t < res:
                    break
            lam *= 0.5
        else:
            raise NonConvergence(f"line search failed at iteration {it} (residual {res:.3g})",
                                 residual=res)
        x, g, mass, res, power = trial, g_t, mass_t, res_t, power_t
    return Grid(x, {"method": "newton", "r": r, "n": n, "iterations": it,
                    "residual": res, "dist": spec.to_json()})
