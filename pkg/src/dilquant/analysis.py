"""Rate diagnostics, Zador constants, empirical measures and the regression experiment."""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from . import distributions as dist
from .dilation import DilationParams, dilate, diverges, power_integral, theta_star
from .errors import DivergentIntegral, UnsupportedDimension, ValidationError
from .greedy import build_greedy
from .quantizer import as_grid, distortion

TV_BINS = 32
BIN_CLIP = 1e-6
PHI_MESH = 100_000


def j_tilde(s):
    """``inf_n n e_s(U[0,1])``: the 1D sharp constant ``(1/2) (s+1)^(-1/s)``."""
    return 0.5 * (s + 1.0) ** (-1.0 / s)


# ---------------------------------------------------------------------------
# rate curves


@dataclass
class RateCurve:
    spec: dist.DistributionSpec
    s: float
    rows: list  # (n, e_s, n^{1/d} e_s)
    r: float = None
    params: DilationParams = None
    meta: dict = field(default_factory=dict)

    CSV_HEADER = ("n", "e_s", "normalized")

    @property
    def levels(self):
        return np.array([row[0] for row in self.rows])

    @property
    def errors(self):
        return np.array([row[1] for row in self.rows])

    @property
    def normalized(self):
        return np.array([row[2] for row in self.rows])

    def spread(self):
        """max / median of the normalized diagnostic."""
        norm = self.normalized
        return float(norm.max() / np.median(norm))


def rate_curve(grids, spec, s, params=None, r=None, **distortion_kw):
    """``e_s`` and ``n^{1/d} e_s`` for each grid (optionally dilated first)."""
    rows = []
    last = 0
    for g in grids:
        g = as_grid(g)
        if g.n <= last:
            raise ValidationError("grids must be ordered by strictly increasing level")
        last = g.n
        if params is not None:
            g = dilate(g, params)
        e = distortion(g, spec, s, **distortion_kw).value
        rows.append((g.n, e, g.n ** (1.0 / spec.d) * e))
    return RateCurve(spec, s, rows, r, params)


# ---------------------------------------------------------------------------
# Zador constant and the liminf bound


def _require_1d(spec):
    if spec.d != 1:
        raise UnsupportedDimension("the sharp constant is only known in closed form for d = 1")


def _integral(spec, theta, mu, a, b):
    if diverges(spec, theta, a, b):
        raise DivergentIntegral(f"int f^{a:g} f_theta^{b:g} diverges at theta = {theta:g}")
    return power_integral(spec, theta, mu, a, b)


def zador_constant(spec, r):
    """``Q_r(P) = J_r (int f^{1/(1+r)})^{(1+r)/r}`` (1D)."""
    _require_1d(spec)
    mass = _integral(spec, 1.0, 0.0, 1.0 / (1.0 + r), 0.0)
    return j_tilde(r) * mass ** ((1.0 + r) / r)


def q_inf(spec, params, r, s):
    """Lower bound of ``liminf n e_s`` for an L^r-optimal sequence dilated by ``params`` (1D).

    ``theta J_s (int f^{1/(1+r)}) (int f^{-s/(1+r)} dP_{theta,mu})^{1/s}``.
    """
    _require_1d(spec)
    theta = params.theta
    mu = float(params.mu_vector(1)[0])
    first = _integral(spec, 1.0, 0.0, 1.0 / (1.0 + r), 0.0)
    second = _integral(spec, theta, mu, -s / (1.0 + r), 1.0)
    return theta * j_tilde(s) * first * second ** (1.0 / s)


# ---------------------------------------------------------------------------
# empirical measure


@dataclass
class EmpiricalMeasureReport:
    edges: np.ndarray
    observed: np.ndarray
    target: np.ndarray
    tv: float

    CSV_HEADER = ("lower", "upper", "observed", "target")

    def rows(self):
        return [(float(a), float(b), float(o), float(t)) for a, b, o, t in
                zip(self.edges[:-1], self.edges[1:], self.observed, self.target)]


def empirical_measure_test(grid, spec, s, bins=TV_BINS):
    """Point-count histogram of ``grid`` against the law with density ∝ ``f^{d/(d+s)}``.

    Bins are equal-probability under the target, between its ``1e-6`` and
    ``1 - 1e-6`` quantiles; points beyond the outer edges are counted in the
    end bins. Reports the total-variation distance.
    """
    grid = as_grid(grid)
    if spec.d != 1 or grid.d != 1:
        raise UnsupportedDimension("empirical measure test is implemented in 1D")
    target_law = dist.powered(spec, spec.d / (spec.d + s))
    probs = np.linspace(BIN_CLIP, 1.0 - BIN_CLIP, bins + 1)
    edges = dist.quantile(target_law, probs)
    idx = np.clip(np.searchsorted(edges, grid.values, side="right") - 1, 0, bins - 1)
    observed = np.bincount(idx, minlength=bins) / grid.n
    target = np.diff(probs)
    target = target / target.sum()
    tv = 0.5 * float(np.abs(observed - target).sum())
    return EmpiricalMeasureReport(edges, observed, target, tv)


# ---------------------------------------------------------------------------
# regression experiment


def regression_slope(x, y):
    """OLS slope (with intercept) of sorted ``y`` on sorted ``x``."""
    x = np.sort(np.ravel(x))
    y = np.sort(np.ravel(y))
    if len(x) != len(y):
        raise ValidationError("both point sets must have the same size")
    if len(x) < 2:
        raise ValidationError("a slope needs at least two points")
    return float(stats.linregress(x, y).slope)


def regression_experiment(spec, r, s, levels, seed=0, sequences=None):
    """Regression slope between the theta*-dilated L^r greedy grid and the L^s greedy grid.

    Per level both point sets are sorted and the L^s points are regressed
    (OLS with intercept) on the dilated points, so a slope below 1 means the
    dilated grid spreads wider than the L^s grid. ``sequences`` may pass
    prebuilt ``(seq_r, seq_s)`` greedy sequences.
    """
    levels = sorted(int(n) for n in levels)
    if sequences is None:
        top = levels[-1]
        seq_r = build_greedy(spec, r, top, seed)
        seq_s = seq_r if s == r else build_greedy(spec, s, top, seed)
    else:
        seq_r, seq_s = sequences
    params = DilationParams.centered(spec, theta_star(spec, r, s))
    out = []
    for n in levels:
        dilated = dilate(seq_r.level_grid(n), params)
        out.append((n, regression_slope(dilated.values, seq_s.level_grid(n).values)))
    return out


# ---------------------------------------------------------------------------
# phi_r


def phi_r(u, r, d=1):
    """``(3^{-r} - u^r) u^d`` on (0, 1/3)."""
    u = np.asarray(u, dtype=float)
    if np.any((u <= 0) | (u >= 1.0 / 3.0)):
        raise ValidationError("phi_r is defined on the open interval (0, 1/3)")
    out = (3.0 ** -r - u ** r) * u ** d
    return float(out) if out.ndim == 0 else out


def phi_r_argmax_closed(r, d=1):
    return (d / (d + r)) ** (1.0 / r) / 3.0


def phi_r_argmax(r, d=1, mesh=PHI_MESH):
    """Mesh maximizer of ``phi_r``, refined by a parabola through the best three nodes.

    Checked against ``(1/3)(d/(d+r))^{1/r}`` to 1e-6.
    """
    u = np.linspace(0.0, 1.0 / 3.0, mesh + 2)[1:-1]
    vals = phi_r(u, r, d)
    k = int(np.clip(np.argmax(vals), 1, len(u) - 2))
    y0, y1, y2 = vals[k - 1:k + 2]
    h = u[1] - u[0]
    denom = y0 - 2.0 * y1 + y2
    shift = 0.5 * h * (y0 - y2) / denom if denom != 0 else 0.0
    best = u[k] + shift
    closed = phi_r_argmax_closed(r, d)
    if not math.isclose(best, closed, abs_tol=1e-6):
        raise ValidationError(f"mesh argmax {best:.9g} disagrees with closed form {closed:.9g}")
    return best
