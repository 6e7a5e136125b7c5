"""Richardson extrapolation with prescribed (possibly fractional) error exponents."""

from __future__ import annotations

import numpy as np

from .errors import ConvergenceError


def richardson(values, steps, exponents):
    """Extrapolate ``F(h) = F0 + sum_j c_j h**p_j`` to ``h = 0``.

    ``values[k]`` is ``F(steps[k])`` and may be an array of any shape.  With
    ``K`` samples the first ``K - 1`` exponents are eliminated exactly by
    solving the Vandermonde-type system; the extrapolation weights are
    returned alongside the limit so callers can judge noise amplification.
    """
    values = np.asarray(values)
    steps = np.asarray(steps, dtype=float)
    K = steps.size
    if K < 1 or values.shape[0] != K:
        raise ValueError("need one value per step")
    p = np.asarray(exponents, dtype=float)[: K - 1]
    if p.size < K - 1:
        raise ValueError(f"{K} samples need {K - 1} exponents, got {p.size}")
    # normalize steps to keep the system well scaled
    hs = steps / steps.max()
    V = np.ones((K, K))
    for j, pj in enumerate(p):
        V[:, j + 1] = hs**pj
    # weights a with sum_k a_k V[k, :] = e_0
    e0 = np.zeros(K)
    e0[0] = 1.0
    a = np.linalg.solve(V.T, e0)
    limit = np.tensordot(a, values, axes=1)
    return limit, a


def richardson_table(values, steps, exponents):
    """Successive extrapolants using the first 1, 2, ..., K samples' tails.

    Entry ``k`` extrapolates the ``k + 1`` finest samples.  Their spread is the
    convergence diagnostic used by callers.
    """
    values = np.asarray(values)
    steps = np.asarray(steps, dtype=float)
    order = np.argsort(steps)[::-1]
    values, steps = values[order], steps[order]
    out = []
    for k in range(1, steps.size + 1):
        lim, _ = richardson(values[-k:], steps[-k:], exponents)
        out.append(lim)
    return out


def check_settled(estimates, rtol, what="extrapolation"):
    """Raise unless the last two estimates agree to ``rtol`` (relative)."""
    a, b = np.asarray(estimates[-1]), np.asarray(estimates[-2])
    scale = max(np.linalg.norm(a), np.finfo(float).tiny)
    gap = np.linalg.norm(a - b) / scale
    if not gap <= rtol:
        diffs = [float(np.linalg.norm(np.asarray(e) - a) / scale) for e in estimates]
        raise ConvergenceError(
            f"{what} did not settle: last two estimates differ by {gap:.3e} (tolerance {rtol:g}); "
            f"distance of each estimate from the final one: {['%.2e' % d for d in diffs]}"
        )
    return gap
