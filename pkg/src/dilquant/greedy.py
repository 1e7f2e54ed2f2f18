"""Greedy quantization sequences built one point at a time.

In 1D, inserting ``xi`` between consecutive points ``x_k < xi < x_{k+1}`` only
changes the new Voronoi cell ``[(x_k + xi)/2, (xi + x_{k+1})/2]``, so the
distortion decrease is

    gain(xi) = int_cell (d_old(x)^r - |x - xi|^r) f(x) dx,

with ``d_old(x) = min(|x - x_k|, |x - x_{k+1}|)``. Each gap keeps its best
candidate; after an insertion only the two new gaps are searched again.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from . import distributions as dist
from .errors import NonConvergence, ValidationError
from .quadrature import integrate_pieces
from .quantizer import Grid, distortion, distortion_power_1d

PRESCAN = 33
XI_TOL = 1e-10
MAX_GOLDEN = 200
TIE_RTOL = 1e-7
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass
class GreedySequence:
    spec: dist.DistributionSpec
    r: float
    points: np.ndarray  # insertion order, shape (N, d)
    distortions: np.ndarray  # e_r of each prefix
    seed: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def size(self):
        return len(self.points)

    def level_grid(self, n):
        return greedy_level_grid(self, n)

    def levels(self):
        return [(i + 1, float(e)) for i, e in enumerate(self.distortions)]


def greedy_level_grid(seq, n):
    """Grid made of the first ``n`` insertions (sorted in 1D)."""
    if not 1 <= n <= seq.size:
        raise ValidationError(f"level {n} out of range 1..{seq.size}")
    prov = {"method": "greedy", "r": seq.r, "seed": seq.seed, "level": n,
            "dist": seq.spec.to_json()}
    return Grid(seq.points[:n], prov)


# ---------------------------------------------------------------------------
# 1D insertion gains


def _power_difference(x, s, c, r):
    """``|x - s|^r - |x - c|^r`` without cancellation when ``x`` is far from both points."""
    old = np.abs(x - s)
    new = np.abs(x - c)
    # on the same side of both points the distance difference is exactly +-(s - c)
    diff = np.where(x <= np.minimum(s, c), s - c, np.where(x >= np.maximum(s, c), c - s, old - new))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = diff / new
        small = np.abs(ratio) < 0.5
        accurate = new ** r * np.expm1(r * np.log1p(np.where(small, ratio, 0.0)))
    return np.where(small, accurate, old ** r - new ** r)


def _gain(spec, r, xi, left, right):
    """Distortion decrease (power r) from inserting ``xi`` between ``left`` and ``right``.

    ``left``/``right`` are the neighbouring grid points, ``-inf``/``inf`` in the tails.
    """
    xi, left, right = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (xi, left, right)))
    lo, hi = dist.support(spec)
    with np.errstate(invalid="ignore"):
        cell_lo = np.clip(np.where(np.isinf(left), lo, 0.5 * (left + xi)), lo, hi)
        cell_hi = np.clip(np.where(np.isinf(right), hi, 0.5 * (xi + right)), lo, hi)
        mid = 0.5 * (left + right)
    cols = [cell_lo, xi, np.where(np.isfinite(mid), mid, cell_lo)]
    cols += [np.full(xi.shape, bp) for bp in dist.breakpoints(spec)]
    inner = np.clip(np.column_stack(cols), cell_lo[:, None], cell_hi[:, None])
    edges = np.sort(np.column_stack([inner, cell_hi]), axis=1)
    fam = dist.family(spec)

    def integrand(x, c, a, b):
        near = np.where(np.abs(x - a) <= np.abs(x - b), a, b)
        return _power_difference(x, near, c, r) * fam.pdf(x)

    gain, _ = integrate_pieces(integrand, edges, args=(xi, left, right),
                               abs_tol=1e-300, rel_tol=1e-12)
    return gain


def insertion_gain(values, spec, r, xi):
    """Gain ``e_r(grid)^r - e_r(grid + {xi})^r`` for each candidate ``xi`` (1D)."""
    values = np.asarray(values, dtype=float)
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    k = np.searchsorted(values, xi)
    padded = np.concatenate([[-np.inf], values, [np.inf]])
    gain = _gain(spec, r, xi, padded[k], padded[k + 1])
    on_grid = np.isin(xi, values)
    return np.where(on_grid, 0.0, gain)


def _golden_max(fun, lo, hi, tol=XI_TOL, max_iter=MAX_GOLDEN):
    """Vectorized golden-section maximization on independent brackets (ties keep the left point)."""
    lo, hi = lo.copy(), hi.copy()
    c = hi - _INVPHI * (hi - lo)
    d = lo + _INVPHI * (hi - lo)
    fc, fd = fun(c, np.arange(len(lo))), fun(d, np.arange(len(lo)))
    for _ in range(max_iter):
        active = np.flatnonzero(hi - lo > tol)
        if active.size == 0:
            break
        keep_left = fc[active] >= fd[active]
        a_l, a_r = active[keep_left], active[~keep_left]
        hi[a_l], d[a_l], fd[a_l] = d[a_l], c[a_l], fc[a_l]
        c[a_l] = hi[a_l] - _INVPHI * (hi[a_l] - lo[a_l])
        lo[a_r], c[a_r], fc[a_r] = c[a_r], d[a_r], fd[a_r]
        d[a_r] = lo[a_r] + _INVPHI * (hi[a_r] - lo[a_r])
        probe = np.where(keep_left, c[active], d[active])
        val = fun(probe, active)
        fc[a_l] = val[keep_left]
        fd[a_r] = val[~keep_left]
    else:
        if np.any(hi - lo > tol):
            raise NonConvergence("golden-section search did not reach the xi tolerance",
                                 residual=float(np.max(hi - lo)))
    take_c = fc >= fd
    return np.where(take_c, c, d), np.where(take_c, fc, fd)


def _search_gaps(spec, r, left, right, bounds):
    """Best insertion point and gain inside each gap ``(left[j], right[j])``.

    A uniform pre-scan picks a starting bracket in every gap, then golden
    section refines it. Gaps are processed together.
    """
    lo_b, hi_b = bounds
    a = np.where(np.isinf(left), lo_b, left)
    b = np.where(np.isinf(right), hi_b, right)
    k = len(a)
    xi_best = 0.5 * (a + b)
    gain_best = np.full(k, -np.inf)
    ok = b > a
    if not ok.any():
        return xi_best, gain_best
    idx = np.flatnonzero(ok)
    a, b, left, right = a[idx], b[idx], left[idx], right[idx]
    t = np.linspace(0.0, 1.0, PRESCAN)
    scan = a[:, None] + (b - a)[:, None] * t[None, :]
    vals = _gain(spec, r, scan.ravel(), np.repeat(left, PRESCAN),
                 np.repeat(right, PRESCAN)).reshape(-1, PRESCAN)
    j = np.argmax(vals, axis=1)
    rows = np.arange(len(idx))
    br_lo = scan[rows, np.maximum(j - 1, 0)]
    br_hi = scan[rows, np.minimum(j + 1, PRESCAN - 1)]
    xi, g = _golden_max(lambda x, sel: _gain(spec, r, x, left[sel], right[sel]), br_lo, br_hi)
    scan_best = vals[rows, j]
    use_scan = scan_best > g
    xi = np.where(use_scan, scan[rows, j], xi)
    g = np.where(use_scan, scan_best, g)
    xi_best[idx] = xi
    gain_best[idx] = g
    return xi_best, gain_best


def _pick(xi, gain):
    top = np.max(gain)
    ties = np.flatnonzero(gain >= top - TIE_RTOL * abs(top))
    return ties[np.argmin(xi[ties])]


def best_insertion(values, spec, r):
    """``(xi, gain)`` maximizing the distortion decrease over the whole line (1D)."""
    values = np.sort(np.asarray(values, dtype=float))
    padded = np.concatenate([[-np.inf], values, [np.inf]])
    xi, gain = _search_gaps(spec, r, padded[:-1], padded[1:], dist.truncation_bounds(spec))
    j = _pick(xi, gain)
    return float(xi[j]), float(gain[j])


def _build_1d(spec, r, size, record_every=1):
    bounds = dist.truncation_bounds(spec)
    first = dist.lr_median(spec, r)
    order = [first]
    values = np.array([first])
    left = np.array([-np.inf, first])
    right = np.array([first, np.inf])
    xi, gain = _search_gaps(spec, r, left, right, bounds)
    errs = [distortion_power_1d(values, spec, r) ** (1.0 / r)]
    for level in range(1, size):
        j = _pick(xi, gain)
        if not np.isfinite(gain[j]) or gain[j] < 0:
            raise NonConvergence("no admissible insertion point", residual=float(gain[j]),
                                 level=level + 1)
        new = xi[j]
        order.append(new)
        values = np.insert(values, j, new)
        # gap j splits into (left[j], new) and (new, right[j])
        sub_l = np.array([left[j], new])
        sub_r = np.array([new, right[j]])
        sx, sg = _search_gaps(spec, r, sub_l, sub_r, bounds)
        left = np.concatenate([left[:j], sub_l, left[j + 1:]])
        right = np.concatenate([right[:j], sub_r, right[j + 1:]])
        xi = np.concatenate([xi[:j], sx, xi[j + 1:]])
        gain = np.concatenate([gain[:j], sg, gain[j + 1:]])
        errs.append(distortion_power_1d(values, spec, r) ** (1.0 / r))
    return np.array(order)[:, None], np.array(errs)


# ---------------------------------------------------------------------------
# d > 1 heuristic


def _build_nd(spec, r, size, seed, cloud_size=20_000, candidates=256):
    """Heuristic d-dimensional greedy search on a fixed Monte Carlo cloud.

    Candidates are scrambled Sobol points in the bounding box of the cloud;
    the best one is refined by coordinate descent with step halving.
    """
    d = spec.d
    cloud_seed, sobol_seed = np.random.SeedSequence(seed).spawn(2)
    cloud = dist.family(spec).sample(np.random.default_rng(cloud_seed), cloud_size)
    box_lo = np.quantile(cloud, 0.001, axis=0)
    box_hi = np.quantile(cloud, 0.999, axis=0)
    width = box_hi - box_lo
    sobol = qmc.Sobol(d, scramble=True, seed=np.random.default_rng(sobol_seed))

    def objective(pts, current):
        # mean of min(current, |X - p|)^r for each candidate p (lower is better)
        out = np.empty(len(pts))
        for i, p in enumerate(pts):
            dp = np.sqrt(((cloud - p) ** 2).sum(1))
            out[i] = np.mean(np.minimum(current, dp) ** r)
        return out

    points = [np.asarray(dist.center(spec), dtype=float)]
    current = np.sqrt(((cloud - points[0]) ** 2).sum(1))
    for _ in range(1, size):
        cand = qmc.scale(sobol.random(candidates), box_lo, box_hi)
        vals = objective(cand, current)
        best = cand[np.argmin(vals)].copy()
        best_val = vals.min()
        step = 0.1 * width
        while np.max(step / width) > 1e-4:
            improved = False
            for axis in range(d):
                for sign in (-1.0, 1.0):
                    trial = best.copy()
                    trial[axis] += sign * step[axis]
                    val = objective(trial[None, :], current)[0]
                    if val < best_val:
                        best, best_val, improved = trial, val, True
            if not improved:
                step = 0.5 * step
        points.append(best)
        current = np.minimum(current, np.sqrt(((cloud - best) ** 2).sum(1)))
    points = np.array(points)
    errs = np.array([
        distortion(Grid(points[:n]), spec, r, mc_samples=cloud_size, seed=seed).value
        for n in range(1, size + 1)])
    return points, errs


def build_greedy(spec, r, size, seed=0):
    """L^r greedy sequence ``a_1, ..., a_size`` with the distortion of every prefix.

    1D: exact gains, per-gap pre-scan plus golden section, ties to the smallest
    point. d > 1: cloud-based heuristic (see :func:`_build_nd`).
    """
    if r <= 0:
        raise ValidationError("r must be positive")
    if size < 1:
        raise ValidationError("target level must be >= 1")
    dist.check_moment(spec, r)
    if spec.d == 1:
        points, errs = _build_1d(spec, r, int(size))
        meta = {"search": "exact"}
    else:
        points, errs = _build_nd(spec, r, int(size), seed)
        meta = {"search": "heuristic"}
    return GreedySequence(spec, r, points, errs, seed, meta)


def certificate(seq, n, challengers=1000, seed=0, slack=1e-8):
    """Check that insertion ``n + 1`` beats uniform random challengers (1D).

    Returns the worst margin ``e_r(with accepted) - min e_r(with challenger)``
    and whether it stays below ``slack``.
    """
    values = np.sort(seq.points[:n, 0])
    lo, hi = dist.truncation_bounds(seq.spec)
    rng = np.random.default_rng(seed)
    cand = rng.uniform(lo, hi, challengers)
    base = distortion_power_1d(values, seq.spec, seq.r)
    accepted = base - insertion_gain(values, seq.spec, seq.r, seq.points[n, 0])[0]
    others = base - insertion_gain(values, seq.spec, seq.r, cand)
    e_acc = max(accepted, 0.0) ** (1.0 / seq.r)
    e_best = np.maximum(others, 0.0).min() ** (1.0 / seq.r)
    margin = e_acc - e_best
    return margin, bool(margin <= slack)


def challenger_distortions(values, spec, r, cand):
    """Distortion of ``values + {c}`` for each challenger, by full recomputation."""
    return np.array([distortion_power_1d(np.sort(np.append(values, c)), spec, r) ** (1.0 / r)
                     for c in np.atleast_1d(cand)])

