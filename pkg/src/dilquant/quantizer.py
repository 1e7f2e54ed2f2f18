"""Grids, nearest-neighbour projection, Voronoi cells and distortion.

In 1D the Voronoi cell of ``x_i`` is ``[m_{i-1}, m_i)`` with midpoints
``m_i = (x_i + x_{i+1}) / 2``; every cell integral is split at the grid points
and at density kinks and integrated (tails included) with the vectorized
Gauss-Kronrod rule. In higher dimension distortions and weights are Monte
Carlo estimates with an explicit seed.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import distributions as dist
from .errors import DimensionMismatch, ValidationError
from .quadrature import integrate

METHODS = ("greedy", "lloyd", "newton", "dilated", "manual")
MC_SAMPLES = 100_000
MC_CHUNK = 8192
CELL_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Grid:
    """Quantization grid of ``n`` distinct points in ``R^d``.

    ``points`` always has shape ``(n, d)``; in 1D it is sorted ascending.
    ``provenance`` records how the grid was produced (``method`` plus
    generating parameters).
    """

    points: np.ndarray
    provenance: dict = field(default_factory=lambda: {"method": "manual"})

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 0:
            pts = pts.reshape(1, 1)
        elif pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise ValidationError("a grid needs at least one point")
        if not np.all(np.isfinite(pts)):
            raise ValidationError("grid points must be finite")
        if pts.shape[1] == 1:
            pts = pts[np.argsort(pts[:, 0], kind="stable")]
            if np.any(np.diff(pts[:, 0]) <= 0):
                raise ValidationError("grid points must be pairwise distinct")
        elif np.unique(pts, axis=0).shape[0] != pts.shape[0]:
            raise ValidationError("grid points must be pairwise distinct")
        pts.setflags(write=False)
        prov = dict(self.provenance)
        prov.setdefault("method", "manual")
        if prov["method"] not in METHODS:
            raise ValidationError(f"unknown provenance method {prov['method']!r}")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "provenance", prov)

    @property
    def d(self):
        return self.points.shape[1]

    @property
    def n(self):
        return self.points.shape[0]

    level = n

    @property
    def values(self):
        """1D coordinates as a flat array."""
        if self.d != 1:
            raise DimensionMismatch("values is only defined for 1D grids")
        return self.points[:, 0]

    def __len__(self):
        return self.n

    def __eq__(self, other):
        return isinstance(other, Grid) and np.array_equal(self.points, other.points)

    __hash__ = None

    def to_json(self):
        return {"d": self.d, "points": self.points.tolist(), "provenance": self.provenance}

    @classmethod
    def from_json(cls, obj):
        try:
            pts = np.asarray(obj["points"], dtype=float)
            d = int(obj["d"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed grid JSON: {exc}") from exc
        if pts.ndim != 2 or pts.shape[1] != d:
            raise DimensionMismatch(f"grid JSON declares d={d} but points have shape {pts.shape}")
        return cls(pts, obj.get("provenance", {"method": "manual"}))


@dataclass(frozen=True)
class DistortionReport:
    r: float
    n: int
    value: float
    method: str
    stderr: float = 0.0
    sample_count: int = None
    seed: int = None

    CSV_HEADER = ("r", "n", "value", "method", "stderr", "seed")

    def row(self):
        return (self.r, self.n, repr(float(self.value)), self.method, repr(float(self.stderr)),
                "" if self.seed is None else self.seed)


def as_grid(grid):
    return grid if isinstance(grid, Grid) else Grid(grid)


def _check_dims(grid, spec):
    if grid.d != spec.d:
        raise DimensionMismatch(f"grid has d={grid.d} but distribution has d={spec.d}")


# ---------------------------------------------------------------------------
# nearest neighbour


def nearest_1d(values, x):
    """Vectorized nearest index into the sorted 1D array ``values`` (ties to the left)."""
    x = np.asarray(x, dtype=float)
    j = np.searchsorted(values, x, side="left")
    j = np.clip(j, 1, len(values) - 1) if len(values) > 1 else np.zeros_like(j)
    if len(values) == 1:
        return j, np.abs(x - values[0])
    left, right = values[j - 1], values[j]
    take_left = np.abs(x - left) <= np.abs(right - x)
    idx = np.where(take_left, j - 1, j)
    return idx, np.abs(x - values[idx])


def nearest_many(grid, x, block=1024):
    """Nearest grid index and distance for each row of ``x``."""
    grid = as_grid(grid)
    x = np.asarray(x, dtype=float)
    if grid.d == 1:
        if x.ndim == 2:
            x = x[:, 0]
        return nearest_1d(grid.values, x)
    if x.ndim != 2 or x.shape[1] != grid.d:
        raise DimensionMismatch(f"points must have shape (k, {grid.d})")
    idx = np.empty(len(x), dtype=int)
    dst = np.empty(len(x))
    for start in range(0, len(x), block):
        sl = slice(start, start + block)
        idx[sl], dst[sl] = _nearest_exact(grid.points, x[sl])
    return idx, dst


def _nearest_exact(points, x):
    # the expansion trick can misorder near-ties; a direct scan keeps the
    # lowest-index tie-break exact
    diff = x[:, None, :] - points[None, :, :]
    dist2 = np.einsum("kij,kij->ki", diff, diff)
    idx = np.argmin(dist2, axis=1)
    return idx, np.sqrt(dist2[np.arange(len(x)), idx])


def nearest(grid, x):
    """``(index, distance)`` of the grid point closest to ``x`` (lowest index on ties)."""
    grid = as_grid(grid)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (grid.d,):
        raise DimensionMismatch(f"point has shape {x.shape}, grid has d={grid.d}")
    idx, dst = nearest_many(grid, x[None, :])
    return int(np.ravel(idx)[0]), float(np.ravel(dst)[0])


# ---------------------------------------------------------------------------
# 1D cell machinery


def cell_pieces(values, spec):
    """Split the support into pieces on which the nearest point and the density are smooth.

    Returns ``(a, b, owner)``: piece endpoints (possibly infinite) and the index
    of the grid point whose cell contains the piece.
    """
    values = np.asarray(values, dtype=float)
    lo, hi = dist.support(spec)
    mids = 0.5 * (values[1:] + values[:-1])
    cuts = np.concatenate([[lo, hi], mids, values, np.asarray(dist.breakpoints(spec), dtype=float)])
    cuts = np.unique(cuts[(cuts >= lo) & (cuts <= hi)])
    a, b = cuts[:-1], cuts[1:]
    probe = np.where(np.isinf(a), b - 1.0, np.where(np.isinf(b), a + 1.0, 0.5 * (a + b)))
    owner, _ = nearest_1d(values, probe)
    return a, b, owner


def cell_integrals(values, spec, kernel, tol=CELL_TOL):
    """``[int_{C_i} kernel(x, x_i) f(x) dx]_i`` over the 1D Voronoi cells."""
    values = np.asarray(values, dtype=float)
    a, b, owner = cell_pieces(values, spec)
    fam = dist.family(spec)
    vals, _ = integrate(lambda x, c: kernel(x, c) * fam.pdf(x), a, b,
                        args=(values[owner],), abs_tol=tol, rel_tol=1e-13)
    return np.bincount(owner, weights=vals, minlength=len(values))


def interval_mass(spec, a, b):
    """``P(a <= X <= b)`` using the CDF below the median and the survival function above."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    fam = dist.family(spec)
    med = float(fam.center()[0]) if fam.symmetric else float(fam.quantile(0.5))
    with np.errstate(invalid="ignore"):
        upper = 0.5 * (a + b) > med
    with np.errstate(invalid="ignore"):
        lower_mass = fam.cdf(b) - fam.cdf(a)
        upper_mass = fam.sf(a) - fam.sf(b)
    return np.maximum(np.where(upper, upper_mass, lower_mass), 0.0)


def cell_masses(values, spec):
    values = np.asarray(values, dtype=float)
    edges = np.concatenate([[-np.inf], 0.5 * (values[1:] + values[:-1]), [np.inf]])
    return interval_mass(spec, edges[:-1], edges[1:])


def distortion_power_1d(values, spec, r, tol=CELL_TOL):
    """``e_r(grid, P)^r`` by exact cell quadrature (1D)."""
    return float(cell_integrals(values, spec, lambda x, c: np.abs(x - c) ** r, tol).sum())


# ---------------------------------------------------------------------------
# Monte Carlo


def _chunk_sums(spec, grid, r, seed_seq, count):
    x = dist.family(spec).sample(np.random.default_rng(seed_seq), count)
    _, dst = nearest_many(grid, x)
    p = dst ** r
    return p.sum(), (p * p).sum()


def monte_carlo_power(grid, spec, r, samples=MC_SAMPLES, seed=0, workers=1):
    """Monte Carlo mean of ``d(X, grid)^r`` and its standard error.

    Samples are drawn in fixed-size chunks, each with its own child seed of
    ``seed``, and reduced in chunk order, so the result does not depend on
    ``workers``.
    """
    counts = [MC_CHUNK] * (samples // MC_CHUNK)
    if samples % MC_CHUNK:
        counts.append(samples % MC_CHUNK)
    children = np.random.SeedSequence(seed).spawn(len(counts))
    jobs = list(zip(children, counts))
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            sums = list(pool.map(lambda job: _chunk_sums(spec, grid, r, *job), jobs))
    else:
        sums = [_chunk_sums(spec, grid, r, *job) for job in jobs]
    s1 = math.fsum(s for s, _ in sums)
    s2 = math.fsum(q for _, q in sums)
    mean = s1 / samples
    var = max(s2 / samples - mean * mean, 0.0) * samples / max(samples - 1, 1)
    return mean, math.sqrt(var / samples)


def distortion(grid, spec, r, method=None, mc_samples=MC_SAMPLES, seed=0, workers=1):
    """L^r quantization error ``e_r(grid, P)`` as a :class:`DistortionReport`.

    ``method`` defaults to ``"exact1d"`` when d = 1 and ``"monte_carlo"`` otherwise.
    """
    grid = as_grid(grid)
    _check_dims(grid, spec)
    if r <= 0:
        raise ValidationError("r must be positive")
    dist.check_moment(spec, r)
    method = method or ("exact1d" if spec.d == 1 else "monte_carlo")
    if method == "exact1d":
        if spec.d != 1:
            raise ValidationError("exact distortion is only available in 1D")
        power = distortion_power_1d(grid.values, spec, r)
        return DistortionReport(r, grid.n, power ** (1.0 / r), "exact1d")
    if method != "monte_carlo":
        raise ValidationError(f"unknown distortion method {method!r}")
    mean, se = monte_carlo_power(grid, spec, r, mc_samples, seed, workers)
    value = mean ** (1.0 / r)
    stderr = (1.0 / r) * mean ** (1.0 / r - 1.0) * se if mean > 0 else 0.0
    return DistortionReport(r, grid.n, value, "monte_carlo", stderr, mc_samples, seed)


def weights(grid, spec, mc_samples=MC_SAMPLES, seed=0):
    """Voronoi cell probabilities ``P(X in W_i(grid))``."""
    grid = as_grid(grid)
    _check_dims(grid, spec)
    if spec.d == 1:
        return cell_masses(grid.values, spec)
    x = dist.sample(spec, mc_samples, seed)
    idx, _ = nearest_many(grid, x)
    counts = np.bincount(idx, minlength=grid.n).astype(float)
    return counts / counts.sum()


# ---------------------------------------------------------------------------
# micro-macro inequality


@dataclass(frozen=True)
class MicroMacro:
    lhs: float
    rhs: float
    holds: bool
    y: np.ndarray = None


def _ball_integral_1d(values, spec, r, c):
    fam = dist.family(spec)
    k = c / (c + 1.0)

    def integrand(x, center):
        dx = np.abs(x - center)
        rho = k * dx
        mass = interval_mass(spec, x - rho, x + rho)
        return mass * dx ** r * fam.pdf(x)

    a, b, owner = cell_pieces(values, spec)
    vals, _ = integrate(integrand, a, b, args=(values[owner],), abs_tol=1e-14, rel_tol=1e-12)
    return float(vals.sum())


def _ball_integral_mc(grid, spec, r, c, samples, seed):
    outer_seed, inner_seed = np.random.SeedSequence(seed).spawn(2)
    x = dist.family(spec).sample(np.random.default_rng(outer_seed), samples)
    ref = dist.family(spec).sample(np.random.default_rng(inner_seed), 4 * samples)
    _, dx = nearest_many(grid, x)
    rho = c / (c + 1.0) * dx
    inside = np.zeros(samples)
    for start in range(0, samples, 256):
        sl = slice(start, start + 256)
        dd = np.linalg.norm(x[sl, None, :] - ref[None, :, :], axis=2)
        inside[sl] = (dd < rho[sl, None]).mean(axis=1)
    return float(np.mean(inside * dx ** r))


def micro_macro_check(grid, spec, y, r, c, tol=1e-12, mc_samples=4000, seed=0):
    """Both sides of the one-point insertion lower bound, with ``nu = P``.

    ``lhs = e_r(grid)^r - e_r(grid + {y})^r`` and
    ``rhs = ((1-c)^r - c^r) / (1+c)^r * int P(B(x, c d(x, grid) / (1+c))) d(x, grid)^r dP(x)``.
    The bound is guaranteed for the best insertion point; pass ``y=None``
    (1D) to use it.
    """
    grid = as_grid(grid)
    _check_dims(grid, spec)
    if not 0 < c < 0.5:
        raise ValidationError("c must lie in (0, 1/2)")
    dist.check_moment(spec, r)
    if y is None:
        if spec.d != 1:
            raise ValidationError("automatic insertion point is only available in 1D")
        from .greedy import best_insertion
        y = np.array([best_insertion(grid.values, spec, r)[0]])
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if y.shape != (grid.d,):
        raise DimensionMismatch(f"y has shape {y.shape}, grid has d={grid.d}")
    factor = ((1 - c) ** r - c ** r) / (1 + c) ** r
    in_grid = np.any(np.all(grid.points == y, axis=1))
    if spec.d == 1:
        before = distortion_power_1d(grid.values, spec, r)
        after = before if in_grid else distortion_power_1d(np.sort(np.append(grid.values, y[0])), spec, r)
        rhs = factor * _ball_integral_1d(grid.values, spec, r, c)
    else:
        before = monte_carlo_power(grid, spec, r, mc_samples * 25, seed)[0]
        bigger = grid if in_grid else Grid(np.vstack([grid.points, y]))
        after = monte_carlo_power(bigger, spec, r, mc_samples * 25, seed)[0]
        rhs = factor * _ball_integral_mc(grid, spec, r, c, mc_samples, seed)
    lhs = before - after
    return MicroMacro(lhs, rhs, bool(lhs >= rhs - tol), y)
