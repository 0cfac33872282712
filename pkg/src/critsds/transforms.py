"""Monotone bijections shared by the map families and the conjugations.

All accept floats or numpy arrays.
"""

from __future__ import annotations

import numpy as np

from ._kernels.pyfallback import _rfwd, _rinv

E = float(np.e)


def interval_to_line(u):
    """r(u) = -1/u + 1/(1-u), a diffeomorphism of (0,1) onto R."""
    return _rfwd(np.asarray(u, dtype=float)) if np.ndim(u) else float(_rfwd(np.float64(u)))


def line_to_interval(x):
    """Inverse of interval_to_line."""
    return _rinv(np.asarray(x, dtype=float)) if np.ndim(x) else float(_rinv(np.float64(x)))


def exp_scale(x):
    """s(x): e^x for x > 1, -e^(-x) for x < -1, linear e*x on [-1, 1].

    Continuous increasing bijection of R agreeing with the exponential far
    from the origin; the linear middle piece is an arbitrary but fixed
    choice that makes results reproducible.
    """
    x = np.asarray(x, dtype=float)
    out = np.where(x > 1.0, np.exp(np.minimum(x, 700.0)),
                   np.where(x < -1.0, -np.exp(np.minimum(-x, 700.0)), E * x))
    return out if out.ndim else float(out)


def exp_scale_inv(y):
    y = np.asarray(y, dtype=float)
    out = np.where(y > E, np.log(np.maximum(y, 1e-300)),
                   np.where(y < -E, -np.log(np.maximum(-y, 1e-300)), y / E))
    return out if out.ndim else float(out)


def power_stretch(x, alpha: float):
    """r(x) = sign(x)|x|^(1-alpha), the exponent-removing conjugation."""
    x = np.asarray(x, dtype=float)
    out = np.sign(x) * np.abs(x) ** (1.0 - alpha)
    return out if out.ndim else float(out)


def power_stretch_inv(y, alpha: float):
    y = np.asarray(y, dtype=float)
    out = np.sign(y) * np.abs(y) ** (1.0 / (1.0 - alpha))
    return out if out.ndim else float(out)
