"""Weighted Besov norms through wavelet coefficients and the identification
of the approximation spaces of L^p(w) with weighted Besov spaces."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .greedy import RankedExpansion, approx_space_norm
from .wavelets import WaveletExpansion
from .weights import DyadicWeight, ap_constant
from .young import Power

__all__ = [
    "besov_wavelet_norm",
    "WeightPowerReport",
    "weight_power_check",
    "IdentificationReport",
    "besov_identification_check",
    "identification_tau",
]


def _lq(values, q):
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return 0.0
    if math.isinf(q):
        return float(values.max())
    scale = values.max()
    if scale == 0:
        return 0.0
    return float(scale * math.fsum(((values / scale) ** q).tolist()) ** (1.0 / q))


def besov_wavelet_norm(E: WaveletExpansion, alpha, p, q, W: DyadicWeight) -> float:
    """[sum_j (sum_{|Q| = 2^-jd} (|Q|^(-alpha/d - 1/2) |s_Q| w(Q)^(1/p))^p)^(q/p)]^(1/q),
    computed separately for every species and then summed."""
    if not p > 0:
        raise ValueError("p must be positive")
    if not q > 0:
        raise ValueError("q must be positive")
    g = E.grid
    if g != W.grid:
        raise ValueError("expansion and weight live on different grids")
    d = g.d
    total = 0.0
    L = 2**d - 1
    for l in range(L):
        per_level = []
        for i, det in enumerate(E.details):
            j = i - g.M
            vol = 2.0 ** (-j * d)
            masses = W.level_masses(j)
            s = np.abs(det[l])
            with np.errstate(divide="ignore", invalid="ignore"):
                terms = np.where(s > 0, vol ** (-alpha / d - 0.5) * s * masses ** (1.0 / p), 0.0)
            per_level.append(_lq(terms.ravel(), p))
        total += _lq(np.array(per_level), q)
    return float(total)


@dataclass(frozen=True)
class WeightPowerReport:
    delta: float
    ratio_min: float
    ratio_max: float
    jensen_holds: bool
    ap_u: float

    @property
    def band(self):
        return self.ratio_max / self.ratio_min


def weight_power_check(W: DyadicWeight, r, delta, max_level=None) -> WeightPowerReport:
    """w_Q / (u_Q)^(1/delta) over all dyadic cubes, with u = w^delta and
    averages w_Q = w(Q)/|Q|.  Jensen gives (u_Q)^(1/delta) <= w_Q cube by cube."""
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if not r >= 1:
        raise ValueError("r must be >= 1")
    g = W.grid
    max_level = g.J if max_level is None else max_level
    u = W.power_of(delta)
    lo, hi, ok = math.inf, 0.0, True
    for j in range(-g.M, max_level + 1):
        vol = 2.0 ** (-j * g.d)
        wq = W.level_masses(j) / vol
        uq = u.level_masses(j) / vol
        pos = wq > 0
        lhs = uq[pos] ** (1.0 / delta)
        ok &= bool(np.all(lhs <= wq[pos] * (1 + 1e-12)))
        ratio = wq[pos] / lhs
        lo = min(lo, float(ratio.min()))
        hi = max(hi, float(ratio.max()))
    ap = ap_constant(u, r, max_level) if r > 1 else math.nan
    return WeightPowerReport(delta, lo, hi, ok, ap)


def identification_tau(gamma, p, d):
    """1/tau = gamma/d + 1/p, computed in exact rational arithmetic when the
    inputs are exactly representable."""
    inv = Fraction(gamma) / d + 1 / Fraction(p)
    return float(1 / inv)


@dataclass(frozen=True)
class IdentificationReport:
    tau: float
    norm_a: float
    norm_b: float
    norm_c: float
    cube_ratio_min: float
    cube_ratio_max: float
    ap_tau: float

    @property
    def ratios(self):
        a, b, c = self.norm_a, self.norm_b, self.norm_c
        return {"b/a": b / a if a else math.nan, "c/a": c / a if a else math.nan, "c/b": c / b if b else math.nan}


def besov_identification_check(
    E: WaveletExpansion, gamma, p, W: DyadicWeight, sigma_mode="greedy"
) -> IdentificationReport:
    """The three norms of the identification with 1/tau = gamma/d + 1/p:

    (a) l^tau of the atom-weighted coefficient sizes in L^p(w);
    (b) the Besov norm with smoothness gamma, p = q = tau, for w^(tau/p);
    (c) the approximation-space norm with alpha = gamma/d, q = tau in L^p(w).

    Also returns the cube-wise ratio of the (b) and (a) terms, which lies in
    [band^(-1/p), 1] for the weight-power band of w, and the A_tau estimate
    of w^(tau/p).
    """
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    if not p > 1:
        raise ValueError("p must exceed 1")
    g = E.grid
    d = g.d
    tau = identification_tau(gamma, p, d)
    F = Power(p)
    R = RankedExpansion(E, W, F)
    sizes = R.sizes[R.sizes > 0]
    a = _lq(sizes, tau)
    u = W.power_of(tau / p)
    b = besov_wavelet_norm(E, gamma, tau, tau, u)
    c = approx_space_norm(E, gamma / d, tau, W, F, sigma_mode=sigma_mode, shift=True)
    lo, hi = math.inf, 0.0
    for i, det in enumerate(E.details):
        j = i - g.M
        vol = 2.0 ** (-j * d)
        wm = W.level_masses(j)
        um = u.level_masses(j)
        pos = wm > 0
        ta = vol ** (-0.5) * wm[pos] ** (1 / p)
        tb = vol ** (-gamma / d - 0.5) * um[pos] ** (1 / tau)
        ratio = tb / ta
        lo, hi = min(lo, float(ratio.min())), max(hi, float(ratio.max()))
    ap = ap_constant(u, tau, g.J) if tau > 1 else math.nan
    return IdentificationReport(tau, a, b, c, lo, hi, ap)
