"""Closed-form real roots of monic cubics, vectorized.

Cardano/trigonometric branches depending on the discriminant, followed by a
single Newton polish in double precision. Inputs are the coefficients of
a^3 + b a^2 + c a + d = 0.
"""

from __future__ import annotations

import numpy as np


def _cbrt(x):
    return np.cbrt(x)


def real_cubic_roots(b, c, d):
    """Real roots of a^3 + b a^2 + c a + d = 0.

    Returns (roots, count): roots has shape broadcast(b,c,d).shape + (3,),
    NaN-padded; count is the number of real roots (1 or 3) per instance.
    """
    b, c, d = np.broadcast_arrays(
        np.asarray(b, dtype=np.float64),
        np.asarray(c, dtype=np.float64),
        np.asarray(d, dtype=np.float64),
    )
    shape = b.shape
    b, c, d = b.ravel(), c.ravel(), d.ravel()
    n = b.size

    # Depressed cubic t^3 + pc t + qc via a = t - b/3.
    shift = b / 3.0
    pc = c - b * b / 3.0
    qc = 2.0 * b**3 / 27.0 - b * c / 3.0 + d
    disc = (qc / 2.0) ** 2 + (pc / 3.0) ** 3

    roots = np.full((n, 3), np.nan)
    count = np.empty(n, dtype=np.int64)

    one = disc > 0
    if np.any(one):
        sq = np.sqrt(disc[one])
        t = _cbrt(-qc[one] / 2.0 + sq) + _cbrt(-qc[one] / 2.0 - sq)
        roots[one, 0] = t - shift[one]
        count[one] = 1

    three = ~one
    if np.any(three):
        p3 = pc[three]
        q3 = qc[three]
        m = 2.0 * np.sqrt(np.maximum(-p3 / 3.0, 0.0))
        # arccos argument; m == 0 means triple root at the shift point.
        with np.errstate(divide="ignore", invalid="ignore"):
            arg = np.where(m > 0.0, 3.0 * q3 / (p3 * np.where(m > 0.0, m, 1.0)), 0.0)
        arg = np.clip(arg, -1.0, 1.0)
        theta = np.arccos(arg) / 3.0
        for j in range(3):
            roots[three, j] = m * np.cos(theta - 2.0 * np.pi * j / 3.0) - shift[three]
        count[three] = 3

    # One Newton step per root; skip where the derivative is tiny.
    r = roots
    with np.errstate(invalid="ignore"):
        f = ((r + b[:, None]) * r + c[:, None]) * r + d[:, None]
        fp = (3.0 * r + 2.0 * b[:, None]) * r + c[:, None]
        step = np.where(np.abs(fp) > 1e-300, f / np.where(fp != 0.0, fp, 1.0), 0.0)
        polished = r - step
        fpol = ((polished + b[:, None]) * polished + c[:, None]) * polished + d[:, None]
        keep = np.abs(fpol) <= np.abs(f)
        roots = np.where(keep & np.isfinite(polished), polished, r)

    return roots.reshape(shape + (3,)), count.reshape(shape)


def cubic_value(a, b, c, d):
    """Evaluate a^3 + b a^2 + c a + d."""
    return ((a + b) * a + c) * a + d


def cubic_scale(a, b, c, d):
    """Magnitude scale of the cubic's terms at a, for relative residuals."""
    return np.maximum.reduce(
        [np.abs(a) ** 3, np.abs(b * a * a), np.abs(c * a), np.abs(d), np.ones_like(a)]
    )
