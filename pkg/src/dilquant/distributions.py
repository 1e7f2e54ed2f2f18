"""Catalog of the probability laws used throughout the package.

A :class:`DistributionSpec` is a small immutable description (kind, dimension,
parameters). All numerical services (density, CDF, quantile, sampling,
moments) are module-level functions dispatching on ``spec.kind``; the
per-kind arithmetic lives in private family classes built once per spec.
"""

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache

import numpy as np
from scipy import optimize, special

from .errors import DimensionMismatch, MomentDivergence, UnsupportedDimension, ValidationError
from .quadrature import integrate

TAIL_EPS = 1e-12


class Kind(str, Enum):
    UNIFORM01 = "Uniform01"
    NORMAL = "Normal"
    EXPONENTIAL = "Exponential"
    HYPER_EXPONENTIAL = "HyperExponential"
    HYPER_GAMMA = "HyperGamma"
    HYPER_CAUCHY = "HyperCauchy"


_PARAM_NAMES = {
    Kind.UNIFORM01: (),
    Kind.NORMAL: ("mean", "std"),
    Kind.EXPONENTIAL: ("rate",),
    Kind.HYPER_EXPONENTIAL: ("lam", "alpha"),
    Kind.HYPER_GAMMA: ("lam", "alpha", "beta"),
    Kind.HYPER_CAUCHY: ("m",),
}


def _freeze(value):
    if isinstance(value, (list, tuple, np.ndarray)):
        return tuple(float(v) for v in np.ravel(value))
    return float(value)


@dataclass(frozen=True)
class DistributionSpec:
    """Parametric description of a catalog density.

    ``params`` is stored as a sorted tuple of ``(name, value)`` pairs so the
    spec is hashable; use :meth:`param` to read values.
    """

    kind: Kind
    d: int = 1
    params: tuple = field(default=())

    def __post_init__(self):
        kind = Kind(self.kind)
        object.__setattr__(self, "kind", kind)
        raw = dict(self.params)
        expected = set(_PARAM_NAMES[kind])
        if set(raw) != expected:
            raise ValidationError(
                f"{kind.value} expects parameters {sorted(expected)}, got {sorted(raw)}")
        if int(self.d) != self.d or self.d < 1:
            raise ValidationError(f"dimension must be a positive integer, got {self.d}")
        object.__setattr__(self, "d", int(self.d))
        if kind is Kind.NORMAL:
            for key in ("mean", "std"):
                vec = np.broadcast_to(np.asarray(raw[key], dtype=float), (self.d,))
                raw[key] = tuple(float(v) for v in vec)
            if min(raw["std"]) <= 0:
                raise ValidationError("Normal std entries must be positive")
        else:
            raw = {k: _freeze(v) for k, v in raw.items()}
        if kind is Kind.EXPONENTIAL:
            if self.d != 1:
                raise UnsupportedDimension("Exponential is defined for d = 1 only")
            if raw["rate"] <= 0:
                raise ValidationError("Exponential rate must be positive")
        if kind in (Kind.HYPER_EXPONENTIAL, Kind.HYPER_GAMMA):
            if raw["lam"] <= 0 or raw["alpha"] <= 0:
                raise ValidationError("lam and alpha must be positive")
        if kind is Kind.HYPER_GAMMA and raw["beta"] <= -self.d:
            raise ValidationError(f"HyperGamma requires beta > -d (got beta={raw['beta']}, d={self.d})")
        if kind is Kind.HYPER_CAUCHY and raw["m"] <= self.d / 2:
            raise ValidationError(f"HyperCauchy requires m > d/2 (got m={raw['m']}, d={self.d})")
        object.__setattr__(self, "params", tuple(sorted(raw.items())))

    def param(self, name):
        return dict(self.params)[name]

    # constructors ---------------------------------------------------------

    @classmethod
    def uniform01(cls, d=1):
        return cls(Kind.UNIFORM01, d)

    @classmethod
    def normal(cls, mean=0.0, std=1.0, d=1):
        return cls(Kind.NORMAL, d, (("mean", mean), ("std", std)))

    @classmethod
    def exponential(cls, rate=1.0):
        return cls(Kind.EXPONENTIAL, 1, (("rate", rate),))

    @classmethod
    def hyper_exponential(cls, lam=1.0, alpha=1.0, d=1):
        return cls(Kind.HYPER_EXPONENTIAL, d, (("alpha", alpha), ("lam", lam)))

    @classmethod
    def hyper_gamma(cls, lam=1.0, alpha=2.0, beta=2.0, d=1):
        return cls(Kind.HYPER_GAMMA, d, (("alpha", alpha), ("beta", beta), ("lam", lam)))

    @classmethod
    def hyper_cauchy(cls, m=2.0, d=1):
        return cls(Kind.HYPER_CAUCHY, d, (("m", m),))

    # serialization ------------------------------------------------------------

    def to_json(self):
        params = {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.params}
        return {"kind": self.kind.value, "d": self.d, "params": params}

    @classmethod
    def from_json(cls, obj):
        if isinstance(obj, str):
            obj = json.loads(obj)
        try:
            kind = Kind(obj["kind"])
        except (KeyError, ValueError) as exc:
            raise ValidationError(f"invalid distribution kind in {obj!r}") from exc
        return cls(kind, int(obj.get("d", 1)), tuple(obj.get("params", {}).items()))

    def label(self):
        return self.kind.value.lower()


PRESETS = {
    "uniform01": DistributionSpec.uniform01,
    "normal": DistributionSpec.normal,
    "exponential": DistributionSpec.exponential,
    "hyperexp": DistributionSpec.hyper_exponential,
    "hypergamma": DistributionSpec.hyper_gamma,
    "hypercauchy": DistributionSpec.hyper_cauchy,
}


def preset(name, d=1):
    """Named catalog entries; ``hypergamma`` is ``|x|^2 exp(-x^2)``."""
    try:
        factory = PRESETS[name.lower()]
    except KeyError:
        raise ValidationError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    if name.lower() == "exponential":
        if d != 1:
            raise UnsupportedDimension("Exponential is defined for d = 1 only")
        return factory()
    return factory(d=d)


# ---------------------------------------------------------------------------
# closed-form integrals


def unit_ball_volume(d):
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def radial_normalization(n_exp, a, b, d=None):
    """Closed form of ``int_0^inf x^n exp(-a x^b) dx = Gamma((n+1)/b) / (b a^((n+1)/b))``.

    With ``d`` given, returns the full-space integral
    ``int_{R^d} |x|^n exp(-a |x|^b) dx = d V_d int_0^inf x^(n+d-1) exp(-a x^b) dx``
    for the Euclidean norm.
    """
    if not (a > 0 and b > 0):
        raise ValidationError("radial_normalization needs a > 0 and b > 0")
    if d is None:
        if n_exp <= -1:
            raise ValidationError("radial_normalization needs n > -1")
        k = (n_exp + 1) / b
        return math.exp(special.gammaln(k) - math.log(b) - k * math.log(a))
    return d * unit_ball_volume(d) * radial_normalization(n_exp + d - 1, a, b)


# ---------------------------------------------------------------------------
# families


class _Family:
    symmetric = True
    breakpoints = ()
    support = (-math.inf, math.inf)
    moment_bound = math.inf

    def __init__(self, spec):
        self.spec = spec
        self.d = spec.d

    # subclasses provide logpdf, cdf/sf for d == 1, sample
    def pdf(self, x):
        return np.exp(self.logpdf(x))

    def quantile(self, u):
        u = np.asarray(u, dtype=float)
        return np.where(u <= 0.5, -self.isf(np.minimum(u, 0.5)), self.isf(np.minimum(1.0 - u, 0.5)))

    def isf(self, q):
        return _invert_sf(self, np.asarray(q, dtype=float))

    def center(self):
        return np.zeros(self.d)


def _invert_sf(fam, q):
    """Solve ``sf(x) = q`` for ``x >= 0`` with ``q`` in ``(0, 1/2]``.

    Bracket expansion followed by safeguarded Newton on ``log sf`` (bisection
    whenever the Newton step leaves the bracket). Symmetric laws only.
    """
    q = np.atleast_1d(q).astype(float)
    out = np.zeros_like(q)
    active = q < 0.5
    out[q <= 0.0] = math.inf
    active &= q > 0.0
    if not active.any():
        return out if out.size > 1 else out[0]
    target = np.log(q[active])
    lo = np.zeros_like(target)
    hi = np.ones_like(target)
    for _ in range(2000):
        with np.errstate(divide="ignore"):
            grow = np.log(fam.sf(hi)) > target
        if not grow.any():
            break
        lo = np.where(grow, hi, lo)
        hi = np.where(grow, hi * 2.0, hi)
    x = 0.5 * (lo + hi)
    for _ in range(200):
        s = fam.sf(x)
        with np.errstate(divide="ignore"):
            g = np.log(s) - target
        lo = np.where(g > 0, x, lo)
        hi = np.where(g > 0, hi, x)
        slope = -fam.pdf(x) / s
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(slope != 0, g / slope, np.inf)
        newton = x - step
        bad = ~np.isfinite(newton) | (newton <= lo) | (newton >= hi)
        x_new = np.where(bad, 0.5 * (lo + hi), newton)
        done = np.abs(x_new - x) <= 1e-15 * np.maximum(1.0, np.abs(x))
        x = x_new
        if done.all() or np.all(hi - lo <= 4e-16 * np.maximum(1.0, hi)):
            break
    out[active] = x
    return out if out.size > 1 else out[0]


class _Uniform01(_Family):
    breakpoints = (0.0, 1.0)
    support = (0.0, 1.0)

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x >= 0) & (x <= 1)
        if self.d > 1:
            inside = inside.all(axis=-1)
        return np.where(inside, 0.0, -np.inf)

    def cdf(self, x):
        return np.clip(np.asarray(x, dtype=float), 0.0, 1.0)

    def sf(self, x):
        return np.clip(1.0 - np.asarray(x, dtype=float), 0.0, 1.0)

    def quantile(self, u):
        return np.clip(np.asarray(u, dtype=float), 0.0, 1.0)

    def isf(self, q):
        return 1.0 - np.asarray(q, dtype=float)

    def sample(self, rng, count):
        return rng.random((count, self.d)) if self.d > 1 else rng.random(count)

    def center(self):
        return np.full(self.d, 0.5)

    def normalization(self):
        return 1.0


class _Normal(_Family):
    def __init__(self, spec):
        super().__init__(spec)
        self.mean = np.array(spec.param("mean"))
        self.std = np.array(spec.param("std"))

    def normalization(self):
        # int exp(-z^2/2) dz over R, per coordinate, scaled by std
        base = 2.0 * radial_normalization(0, 0.5, 2.0)
        return float(np.prod(base * self.std))

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        z = (x - self.mean) / self.std if self.d > 1 else (x - self.mean[0]) / self.std[0]
        q = np.sum(z * z, axis=-1) if self.d > 1 else z * z
        return -0.5 * q - math.log(self.normalization())

    def cdf(self, x):
        return special.ndtr((np.asarray(x, dtype=float) - self.mean[0]) / self.std[0])

    def sf(self, x):
        return special.ndtr(-(np.asarray(x, dtype=float) - self.mean[0]) / self.std[0])

    def quantile(self, u):
        return self.mean[0] + self.std[0] * special.ndtri(np.asarray(u, dtype=float))

    def isf(self, q):
        return self.mean[0] - self.std[0] * special.ndtri(np.asarray(q, dtype=float))

    def sample(self, rng, count):
        if self.d == 1:
            return self.mean[0] + self.std[0] * rng.standard_normal(count)
        return self.mean + self.std * rng.standard_normal((count, self.d))

    def center(self):
        return self.mean.copy()


class _Exponential(_Family):
    symmetric = False
    breakpoints = (0.0,)
    support = (0.0, math.inf)

    def __init__(self, spec):
        super().__init__(spec)
        self.rate = spec.param("rate")

    def normalization(self):
        return radial_normalization(0, self.rate, 1.0)

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= 0, -self.rate * x - math.log(self.normalization()), -np.inf)

    def cdf(self, x):
        return -np.expm1(-self.rate * np.maximum(np.asarray(x, dtype=float), 0.0))

    def sf(self, x):
        return np.exp(-self.rate * np.maximum(np.asarray(x, dtype=float), 0.0))

    def quantile(self, u):
        return -np.log1p(-np.asarray(u, dtype=float)) / self.rate

    def isf(self, q):
        return -np.log(np.asarray(q, dtype=float)) / self.rate

    def sample(self, rng, count):
        return self.quantile(rng.random(count))


class _PowerExp(_Family):
    """Radial ``|x|^beta exp(-lam |x|^alpha)``; beta = 0 is the hyper-exponential law."""

    breakpoints = (0.0,)

    def __init__(self, spec):
        super().__init__(spec)
        self.lam = spec.param("lam")
        self.alpha = spec.param("alpha")
        self.beta = spec.param("beta") if spec.kind is Kind.HYPER_GAMMA else 0.0
        self.log_z = math.log(radial_normalization(self.beta, self.lam, self.alpha, self.d))
        self.shape = (self.beta + self.d) / self.alpha

    def normalization(self):
        return math.exp(self.log_z)

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        rho = np.sqrt(np.sum(x * x, axis=-1)) if self.d > 1 else np.abs(x)
        with np.errstate(divide="ignore"):
            log_rho = np.log(rho)
        out = -self.lam * rho ** self.alpha - self.log_z
        if self.beta != 0:
            out = out + self.beta * log_rho
        return out

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        p = special.gammainc(self.shape, self.lam * np.abs(x) ** self.alpha)
        return 0.5 + 0.5 * np.sign(x) * p

    def sf(self, x):
        return self.cdf(-np.asarray(x, dtype=float))

    def radius_quantile(self, u):
        return (special.gammaincinv(self.shape, u) / self.lam) ** (1.0 / self.alpha)

    def sample(self, rng, count):
        if self.d == 1:
            return self.quantile(rng.random(count))
        return _radial_sample(rng, count, self.d, self.radius_quantile)


class _HyperCauchy(_Family):
    def __init__(self, spec):
        super().__init__(spec)
        self.m = spec.param("m")
        self.moment_bound = 2 * self.m - self.d
        # d V_d int_0^inf rho^(d-1) (1+rho^2)^-m = d V_d B(d/2, m - d/2) / 2
        self.log_z = (math.log(self.d * unit_ball_volume(self.d) / 2.0)
                      + special.betaln(self.d / 2.0, self.m - self.d / 2.0))

    def normalization(self):
        return math.exp(self.log_z)

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        rho2 = np.sum(x * x, axis=-1) if self.d > 1 else x * x
        return -self.m * np.log1p(rho2) - self.log_z

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x < 0, self._upper(-x), 1.0 - self._upper(x))

    def sf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x > 0, self._upper(x), 1.0 - self._upper(-x))

    def _upper(self, t):
        # P(X > t) for t >= 0
        return 0.5 * special.betainc(self.m - 0.5, 0.5, 1.0 / (1.0 + t * t))

    def radius_quantile(self, u):
        b = special.betaincinv(self.d / 2, self.m - self.d / 2, u)
        return np.sqrt(b / (1.0 - b))

    def sample(self, rng, count):
        if self.d == 1:
            return self.quantile(rng.random(count))
        return _radial_sample(rng, count, self.d, self.radius_quantile)


def _radial_sample(rng, count, d, radius_quantile):
    radius = radius_quantile(rng.random(count))
    direction = rng.standard_normal((count, d))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    return radius[:, None] * direction


_FAMILIES = {
    Kind.UNIFORM01: _Uniform01,
    Kind.NORMAL: _Normal,
    Kind.EXPONENTIAL: _Exponential,
    Kind.HYPER_EXPONENTIAL: _PowerExp,
    Kind.HYPER_GAMMA: _PowerExp,
    Kind.HYPER_CAUCHY: _HyperCauchy,
}


@lru_cache(maxsize=256)
def family(spec):
    return _FAMILIES[spec.kind](spec)


# ---------------------------------------------------------------------------
# public operations


def _require_1d(spec, what):
    if spec.d != 1:
        raise UnsupportedDimension(f"{what} is only available for d = 1 (got d = {spec.d})")


def _check_point(spec, x):
    x = np.asarray(x, dtype=float)
    if spec.d > 1 and (x.ndim == 0 or x.shape[-1] != spec.d):
        raise DimensionMismatch(f"expected points of dimension {spec.d}, got shape {x.shape}")
    if spec.d == 1 and x.ndim >= 1 and x.shape[-1:] == (1,) and x.ndim == 2:
        x = x[:, 0]
    return x


def density(spec, x):
    """Normalized density at ``x`` (scalar or array of points)."""
    return family(spec).pdf(_check_point(spec, x))


def log_density(spec, x):
    return family(spec).logpdf(_check_point(spec, x))


def cdf(spec, x):
    _require_1d(spec, "cdf")
    return family(spec).cdf(x)


def sf(spec, x):
    _require_1d(spec, "sf")
    return family(spec).sf(x)


def quantile(spec, u):
    _require_1d(spec, "quantile")
    u = np.asarray(u, dtype=float)
    if np.any((u < 0) | (u > 1)):
        raise ValidationError("quantile levels must lie in [0, 1]")
    return family(spec).quantile(u)


def isf(spec, q):
    """Inverse survival function, accurate deep in the upper tail."""
    _require_1d(spec, "isf")
    return family(spec).isf(q)


def sample(spec, count, seed):
    """``count`` draws, deterministic in ``seed``; shape ``(count,)`` or ``(count, d)``."""
    if count < 1:
        raise ValidationError("count must be >= 1")
    rng = np.random.default_rng(seed)
    return family(spec).sample(rng, int(count))


def normalization(spec):
    """Integral of the unnormalized catalog density (finite by construction)."""
    return family(spec).normalization()


def support(spec):
    return family(spec).support


def breakpoints(spec):
    """Points where the 1D density is not smooth (quadrature breakpoints)."""
    return family(spec).breakpoints


def truncation_bounds(spec, eps=TAIL_EPS):
    """Support clipped to the ``eps`` / ``1 - eps`` quantiles (finite ends kept)."""
    _require_1d(spec, "truncation_bounds")
    lo, hi = support(spec)
    fam = family(spec)
    if not math.isfinite(lo):
        lo = float(-fam.isf(eps)) if fam.symmetric else float(fam.quantile(eps))
    if not math.isfinite(hi):
        hi = float(fam.isf(eps))
    return lo, hi


def center(spec):
    """Symmetry center for symmetric laws, the dilation center otherwise."""
    return family(spec).center()


def is_symmetric(spec):
    return family(spec).symmetric


def moment_bound(spec):
    """Supremum of the orders ``r`` with ``E|X|^r`` finite."""
    return family(spec).moment_bound


def check_moment(spec, r):
    if r >= moment_bound(spec):
        raise MomentDivergence(
            f"{spec.kind.value} has no finite moment of order {r} "
            f"(requires r < {moment_bound(spec):g})")


def abs_moment_1d(spec, r, a=0.0):
    """``E|X - a|^r`` by adaptive quadrature (d = 1)."""
    _require_1d(spec, "abs_moment_1d")
    check_moment(spec, r)
    lo, hi = support(spec)
    cuts = sorted({lo, hi, float(a), *breakpoints(spec)})
    cuts = [c for c in cuts if lo <= c <= hi]
    fam = family(spec)
    val, _ = integrate(lambda x: np.abs(x - a) ** r * fam.pdf(x), cuts[:-1], cuts[1:])
    return float(val.sum())


def _golden_min(fun, lo, hi, tol=1e-10, max_iter=200):
    invphi = (math.sqrt(5) - 1) / 2
    c = hi - invphi * (hi - lo)
    d = lo + invphi * (hi - lo)
    fc, fd = fun(c), fun(d)
    for _ in range(max_iter):
        if hi - lo <= tol * max(1.0, abs(lo) + abs(hi)):
            break
        if fc <= fd:
            hi, d, fd = d, c, fc
            c = hi - invphi * (hi - lo)
            fc = fun(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + invphi * (hi - lo)
            fd = fun(d)
    return (c, fc) if fc <= fd else (d, fd)


def _moment_slope(spec, r, a):
    """Derivative of ``a -> E|X - a|^r / r``: ``E[sign(a - X) |a - X|^(r-1)]``."""
    lo, hi = support(spec)
    cuts = sorted({lo, hi, float(a), *breakpoints(spec)})
    cuts = [c for c in cuts if lo <= c <= hi]
    fam = family(spec)
    val, _ = integrate(lambda x: np.sign(a - x) * np.abs(a - x) ** (r - 1) * fam.pdf(x),
                       cuts[:-1], cuts[1:])
    return float(val.sum())


def lr_median(spec, r):
    """Minimizer of ``a -> E|X - a|^r`` (1D).

    Symmetry center when the law is symmetric, the median for r = 1, a root of
    the monotone derivative for r > 1 and golden-section for r < 1.
    """
    _require_1d(spec, "lr_median")
    check_moment(spec, r)
    if is_symmetric(spec):
        return float(center(spec)[0])
    if r == 1:
        return float(quantile(spec, 0.5))
    lo, hi = float(quantile(spec, 1e-6)), float(quantile(spec, 1 - 1e-6))
    if r > 1:
        return float(optimize.brentq(lambda a: _moment_slope(spec, r, a), lo, hi, xtol=1e-14, rtol=1e-15))
    a, _ = _golden_min(lambda a: abs_moment_1d(spec, r, a), lo, hi, tol=1e-12)
    return a


def sigma_r(spec, r, mc_samples=200_000, seed=0):
    """``inf_a ||X - a||_r``.

    1D: quadrature plus golden-section over ``a`` (symmetry center when the law
    is symmetric). d > 1: closed radial forms for radial laws and isotropic
    Normals, Monte Carlo about the symmetry center otherwise.
    """
    check_moment(spec, r)
    if spec.d == 1:
        return abs_moment_1d(spec, r, lr_median(spec, r)) ** (1.0 / r)
    fam = family(spec)
    d = spec.d
    if isinstance(fam, _PowerExp):
        k0 = (d + fam.beta) / fam.alpha
        k1 = (d + fam.beta + r) / fam.alpha
        log_m = special.gammaln(k1) - special.gammaln(k0) - (r / fam.alpha) * math.log(fam.lam)
        return math.exp(log_m / r)
    if isinstance(fam, _HyperCauchy):
        log_m = special.betaln((d + r) / 2, fam.m - (d + r) / 2) - special.betaln(d / 2, fam.m - d / 2)
        return math.exp(log_m / r)
    if isinstance(fam, _Normal) and np.allclose(fam.std, fam.std[0]):
        log_m = (r / 2) * math.log(2) + special.gammaln((d + r) / 2) - special.gammaln(d / 2)
        return fam.std[0] * math.exp(log_m / r)
    pts = sample(spec, mc_samples, seed)
    dist = np.linalg.norm(pts - center(spec), axis=1)
    return float(np.mean(dist ** r) ** (1.0 / r))


def scaled(spec, theta, mu=None):
    """Law of ``(X - mu) / theta + mu`` when it stays in the catalog."""
    if theta <= 0:
        raise ValidationError("theta must be positive")
    fam = family(spec)
    mu = center(spec) if mu is None else np.broadcast_to(np.asarray(mu, dtype=float), (spec.d,))
    kind = spec.kind
    if kind is Kind.NORMAL:
        mean = (fam.mean - mu) / theta + mu
        return DistributionSpec.normal(mean, fam.std / theta, spec.d)
    if not np.allclose(mu, 0.0):
        raise ValidationError(f"{kind.value} is closed under scaling about 0 only")
    if kind is Kind.EXPONENTIAL:
        return DistributionSpec.exponential(fam.rate * theta)
    if kind is Kind.HYPER_EXPONENTIAL:
        return DistributionSpec.hyper_exponential(fam.lam * theta ** fam.alpha, fam.alpha, spec.d)
    if kind is Kind.HYPER_GAMMA:
        return DistributionSpec.hyper_gamma(fam.lam * theta ** fam.alpha, fam.alpha, fam.beta, spec.d)
    raise ValidationError(f"{kind.value} is not closed under scaling")


def powered(spec, p):
    """The catalog law with density proportional to ``f^p``."""
    if p <= 0:
        raise ValidationError("power must be positive")
    fam = family(spec)
    kind = spec.kind
    if kind is Kind.UNIFORM01:
        return spec
    if kind is Kind.NORMAL:
        return DistributionSpec.normal(fam.mean, fam.std / math.sqrt(p), spec.d)
    if kind is Kind.EXPONENTIAL:
        return DistributionSpec.exponential(fam.rate * p)
    if kind is Kind.HYPER_EXPONENTIAL:
        return DistributionSpec.hyper_exponential(fam.lam * p, fam.alpha, spec.d)
    if kind is Kind.HYPER_GAMMA:
        return DistributionSpec.hyper_gamma(fam.lam * p, fam.alpha, fam.beta * p, spec.d)
    return DistributionSpec.hyper_cauchy(fam.m * p, spec.d)
