"""Brute-force grid maximization of the box objective, used as the
independent oracle for the closed-form solver.  Kept deliberately dumb:
enumerate grid points of the domain (bounds always included) and take
the max of min(beta - alpha, a*alpha + b, c*beta + d)."""

from fractions import Fraction

import numpy as np

from permsolve.numerics import NEG_INF, ext
from permsolve.optimizer import BoxProblem


def mu_grid_max(p: BoxProblem, step: Fraction):
    """Max of mu over the step-grid of D; exact endpoints are included.

    Computed in float64; callers compare against a tolerance that is
    several orders of magnitude above float error.
    """
    ma = p.m_alpha.expr.const.value
    mb = p.m_beta.expr.const.value
    Ma = p.M_alpha.expr.const
    Mb = p.M_beta.expr.const
    if Mb.is_pos_inf:
        raise ValueError("grid oracle needs a bounded box")
    Ma_v = min(Ma.value if Ma.is_finite else Mb.value, Mb.value)
    mb_v = max(mb, ma)
    if ma > Ma_v or mb_v > Mb.value:
        return NEG_INF

    def axis(lo, hi):
        n = int((hi - lo) / step)
        pts = [float(lo + k * step) for k in range(n + 1)]
        if not pts or Fraction(lo) + n * step != Fraction(hi):
            pts.append(float(hi))
        return np.array(pts)

    alphas = axis(ma, Ma_v)
    betas = axis(mb_v, Mb.value)
    a_col = alphas[:, None]
    b_row = betas[None, :]
    def offset(expr):
        if expr.is_finite:
            return float(expr.const.value)
        return -np.inf if expr.const.is_neg_inf else np.inf

    width = b_row - a_col
    f_term = float(p.a) * a_col + offset(p.b)
    g_term = float(p.c) * b_row + offset(p.d)
    mu = np.minimum(np.minimum(width, f_term), g_term)
    mu[width < 0] = -np.inf
    best = float(mu.max())
    if best == -np.inf:
        return NEG_INF
    return ext(Fraction(best).limit_denominator(10 ** 9))
