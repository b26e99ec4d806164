"""Adaptive quadrature on intervals, with a tangent map for heavy tails."""
from __future__ import annotations

import warnings

import numpy as np
from scipy import integrate

from .errors import QuadratureError

MAX_PANELS = 10_000


def integrate_interval(f, lower=-np.inf, upper=np.inf, tol=1e-9, rel_tol=1e-10, heavy_tails=False, points=None):
    """Integrate a scalar function over ``(lower, upper)``.

    QUADPACK's adaptive Gauss-Kronrod rule does the work.  With
    ``heavy_tails`` an infinite line is first mapped by ``x = tan(u)`` onto
    ``(-pi/2, pi/2)`` so algebraically decaying integrands (Cauchy) become
    bounded.  Raises :class:`QuadratureError` if the requested absolute
    tolerance is not met within the panel budget.
    """
    if heavy_tails and np.isinf(lower) and np.isinf(upper):
        def g(u):
            c = np.cos(u)
            if c == 0.0:
                return 0.0
            return f(np.tan(u)) / (c * c)
        a, b = -0.5 * np.pi, 0.5 * np.pi
        pts = None if points is None else [np.arctan(p) for p in points]
        fun = g
    else:
        a, b, fun, pts = lower, upper, f, points
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            kw = dict(epsabs=tol, epsrel=rel_tol, limit=MAX_PANELS)
            if pts is not None and np.isfinite(a) and np.isfinite(b):
                kw["points"] = pts
            value, err = integrate.quad(fun, a, b, **kw)
        except integrate.IntegrationWarning as exc:
            raise QuadratureError(str(exc).splitlines()[0]) from None
    if not np.isfinite(value):
        raise QuadratureError("integral is not finite")
    return float(value)
