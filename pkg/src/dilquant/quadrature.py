"""Vectorized adaptive Gauss-Kronrod (G7/K15) quadrature over many intervals.

Every 1D integral in the package (cell distortions, cell moments, insertion
gains, Jacobian entries) goes through :func:`integrate`, which treats a whole
batch of intervals at once and bisects only the pieces whose error estimate
is too large. Infinite endpoints are handled by the substitution
``x = a + (1 - t) / t`` on ``t in (0, 1]``.
"""

import numpy as np

from .errors import QuadratureFailure

# QUADPACK qk15 abscissae (non-negative half) and weights.
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
GAUSS_WEIGHTS = np.zeros(15)
# Gauss nodes are the odd-indexed Kronrod abscissae (1, 3, 5, 7 in _XGK).
GAUSS_WEIGHTS[[1, 3, 5]] = _WG[:3]
GAUSS_WEIGHTS[7] = _WG[3]
GAUSS_WEIGHTS[[9, 11, 13]] = _WG[:3][::-1]

MAX_PIECES = 200_000
_EPS = np.finfo(float).eps


def _prepare(a, b):
    """Split infinite intervals into finite pieces and tails mapped to t-space.

    Returns ``lo, hi, anchor, orient, owner``. Doubly infinite intervals are
    split at 0. A half-line from ``anchor`` becomes the finite piece of unit
    length next to ``anchor`` (``orient = 0``) plus a tail on ``t in (0, 1/2]``
    with ``x = anchor + orient (1 - t) / t`` (``orient = +1`` to the right,
    ``-1`` to the left). Keeping the neighbourhood of ``anchor`` in plain
    coordinates preserves resolution there.
    """
    idx = np.arange(a.size)
    fa, fb = np.isfinite(a), np.isfinite(b)
    nonempty = a < b
    fin = nonempty & fa & fb
    rinf = nonempty & fa & ~fb
    linf = nonempty & ~fa & fb
    both = nonempty & ~fa & ~fb
    n_both = both.sum()
    # tails: (anchor, orient, owner)
    t_anchor = np.concatenate([a[rinf], b[linf], np.zeros(2 * n_both)])
    t_orient = np.concatenate([np.ones(rinf.sum()), -np.ones(linf.sum()),
                               -np.ones(n_both), np.ones(n_both)])
    t_owner = np.concatenate([idx[rinf], idx[linf], idx[both], idx[both]])
    near_lo = np.where(t_orient > 0, t_anchor, t_anchor - 1.0)
    near_hi = near_lo + 1.0
    n_tail = t_anchor.size
    lo = np.concatenate([a[fin], near_lo, np.zeros(n_tail)])
    hi = np.concatenate([b[fin], near_hi, np.full(n_tail, 0.5)])
    anchor = np.concatenate([np.zeros(fin.sum() + n_tail), t_anchor])
    orient = np.concatenate([np.zeros(fin.sum() + n_tail), t_orient])
    owner = np.concatenate([idx[fin], t_owner, t_owner])
    return lo, hi, anchor, orient, owner


def integrate(func, a, b, args=(), abs_tol=1e-12, rel_tol=1e-12,
              max_depth=80, raise_on_failure=True):
    """Integrate ``func`` over each ``[a[i], b[i]]``.

    ``func(x, *args)`` receives ``x`` of shape ``(k, 15)`` and each ``args``
    entry sliced to shape ``(k, 1)`` (the per-interval parameters), and must
    return an array shaped like ``x``. Returns ``(values, errors)`` arrays of
    the same length as ``a``.
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    a, b = np.broadcast_arrays(a, b)
    args = [np.broadcast_to(np.asarray(p, dtype=float), a.shape) for p in args]
    m = a.shape[0]
    if m == 0:
        return np.zeros(0), np.zeros(0)
    sign = np.where(a > b, -1.0, 1.0)
    lo, hi, anchor, orient, owner = _prepare(np.minimum(a, b), np.maximum(a, b))
    values = np.zeros(m)
    errors = np.zeros(m)
    tol = np.full(lo.shape, float(abs_tol))
    cap = max(MAX_PIECES, 64 * lo.size)
    depth = 0
    while lo.size:
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        t = mid[:, None] + half[:, None] * NODES
        if orient.any():
            o = orient[:, None]
            finite = o == 0
            x = np.where(finite, t, anchor[:, None] + o * (1.0 - t) / t)
            jac = np.where(finite, 1.0, 1.0 / (t * t))
        else:
            x, jac = t, 1.0
        params = [p[owner][:, None] for p in args]
        with np.errstate(over="ignore", invalid="ignore", under="ignore"):
            fx = np.asarray(func(x, *params), dtype=float) * jac
        if not np.isfinite(fx).all():
            raise QuadratureFailure("integrand returned non-finite values")
        kron = half * (fx @ KRONROD_WEIGHTS)
        err = np.abs(kron - half * (fx @ GAUSS_WEIGHTS))
        # below this level the Kronrod-Gauss difference is pure rounding noise
        noise = 50.0 * _EPS * half * (np.abs(fx) @ KRONROD_WEIGHTS)
        # relative tolerance against the running estimate of the whole integral,
        # shared among the at most 2^depth pieces of each original piece
        total = values + np.bincount(owner, kron, minlength=m)
        share = rel_tol * np.abs(total[owner]) * 0.5 ** depth
        done = ((err <= tol) | (err <= share) | (err <= noise)
                | (half <= 1e-15 * np.abs(mid)))
        # global test: stop refining an integral once its summed error estimate
        # meets the budget (needed for integrable endpoint singularities, where
        # the error of the end piece only shrinks like a power of its width)
        pending = errors + np.bincount(owner, err, minlength=m)
        budget = np.maximum(abs_tol, rel_tol * np.abs(total))
        done |= (pending <= budget)[owner]
        if depth >= max_depth and not done.all():
            if raise_on_failure:
                raise QuadratureFailure(
                    f"tolerance {abs_tol:g} not reached after {max_depth} bisections "
                    f"(worst error {err[~done].max():.3g})")
            done[:] = True
        if done.all():
            values += np.bincount(owner, kron, minlength=m)
            errors += np.bincount(owner, err, minlength=m)
            break
        values += np.bincount(owner[done], kron[done], minlength=m)
        errors += np.bincount(owner[done], err[done], minlength=m)
        keep = ~done
        if keep.sum() > cap:
            raise QuadratureFailure(f"more than {cap} unresolved subintervals")
        mid_k = mid[keep]
        lo = np.concatenate([lo[keep], mid_k])
        hi = np.concatenate([mid_k, hi[keep]])
        anchor = np.tile(anchor[keep], 2)
        orient = np.tile(orient[keep], 2)
        owner = np.tile(owner[keep], 2)
        tol = np.tile(np.maximum(0.5 * tol[keep], 1e-300), 2)
        depth += 1
    return sign * values, errors


def integrate_pieces(func, edges, args=(), **kw):
    """Integrate over consecutive pieces ``[edges[:, j], edges[:, j+1]]``.

    ``edges`` has shape ``(m, k)`` and each row must be nondecreasing; the
    pieces of one row are summed. ``args`` are per-row parameters. Used to
    place breakpoints at kinks of the integrand.
    """
    edges = np.asarray(edges, dtype=float)
    m, k = edges.shape
    a = edges[:, :-1].ravel()
    b = edges[:, 1:].ravel()
    rep = tuple(np.repeat(np.asarray(p, dtype=float) * np.ones(m), k - 1) for p in args)
    keep = b > a
    vals = np.zeros(a.shape)
    errs = np.zeros(a.shape)
    if keep.any():
        v, e = integrate(func, a[keep], b[keep], tuple(p[keep] for p in rep), **kw)
        vals[keep] = v
        errs[keep] = e
    return vals.reshape(m, k - 1).sum(axis=1), errs.reshape(m, k - 1).sum(axis=1)
