"""Pure-numpy trajectory kernels (fallback backend).

Each function advances a vector of chain states through a block of
pre-drawn per-step parameters, writing the visited values to `out`.
Shapes: states are (n_chains,), parameter blocks and `out` are
(block_len, n_chains).

The compiled backend implements the same functions with identical
floating-point semantics (same operations, same order, no FMA fusion),
so both backends produce bit-identical trajectories from the same
parameter blocks.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"


def affine_block(x, a, b, out):
    """x <- a*x + b, row by row."""
    for j in range(a.shape[0]):
        np.multiply(a[j], x, out=out[j])
        out[j] += b[j]
        x[:] = out[j]


def goldie_max_block(x, a, b, c, out):
    """x <- max(a*x, b) + c."""
    for j in range(a.shape[0]):
        np.multiply(a[j], x, out=out[j])
        np.maximum(out[j], b[j], out=out[j])
        out[j] += c[j]
        x[:] = out[j]


def goldie_sqrt_block(x, a, b, c, out):
    """x <- sqrt((a*x)**2 + b*x + c)."""
    for j in range(a.shape[0]):
        u = a[j] * x
        v = u * u + b[j] * x
        v += c[j]
        np.sqrt(v, out=out[j])
        x[:] = out[j]


def reflected_block(x, u, out):
    """x <- |x - u|."""
    for j in range(u.shape[0]):
        np.subtract(x, u[j], out=out[j])
        np.abs(out[j], out=out[j])
        x[:] = out[j]


def _rinv(x):
    # inverse of r(u) = -1/u + 1/(1-u) on (0,1); root of x*u^2 + (2-x)*u - 1
    num = (x - 2.0) + np.sqrt(x * x + 4.0)
    den = np.where(x == 0.0, 1.0, 2.0 * x)
    return np.where(x == 0.0, 0.5, num / den)


def _rfwd(u):
    num = 2.0 * u - 1.0
    den = u * (1.0 - u)
    return num / den


def interval_mix_block(x, alin, t, out):
    """x <- r((1-t)*rinv(alin*x) + t*rinv(x)).

    Iterates the real-line conjugate of the interval map
    phi(u) = (1-t)*rinv(alin*r(u)) + t*u.
    """
    for j in range(alin.shape[0]):
        u1 = _rinv(alin[j] * x)
        u2 = _rinv(x)
        m = (1.0 - t) * u1 + t * u2
        out[j] = _rfwd(m)
        x[:] = out[j]


def right_walk_hit_block(aa, bb, a, b, k1, k2, m1, m2, hit_step, dead, base_step):
    """Advance right-walk states and record first entry into the window set.

    State (bb, aa) is the composed affine map of the right walk
    R_n = R_{n-1} * (b_n, a_n):  bb <- bb + aa*b, aa <- aa*a.
    A chain "hits" at the first step where aa*k1 - bb >= m1 and
    aa*k2 + bb <= m2 (the composed map sends [k1,k2] into [m1,m2] for any
    map sandwiched by its affine envelopes).  Since bb is nondecreasing
    (b > 0), bb > m2 makes a chain permanently dead.

    hit_step: int64 (n,), -1 while unhit; dead: uint8 (n,).  Dead or hit
    chains keep consuming parameter rows (determinism is per-chain stream
    position, not per-branch), their state is simply no longer inspected.
    """
    k = a.shape[0]
    for j in range(k):
        live = (dead == 0) & (hit_step < 0)
        bb += aa * b[j]
        aa *= a[j]
        if live.any():
            hit = live & (aa * k1 - bb >= m1) & (aa * k2 + bb <= m2)
            hit_step[hit] = base_step + j + 1
        dead[bb > m2] = 1
