"""Luxemburg norms of grid functions in weighted Orlicz spaces."""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import brentq

from .wavelets import GridFunction, atom
from .weights import DyadicCube, DyadicWeight
from .young import Power, YoungFunction

__all__ = [
    "ConvergenceError",
    "modular",
    "luxemburg_norm",
    "luxemburg_norm_values",
    "indicator_norm",
    "atom_luxemburg_norm",
    "power_norm",
    "fast_norm",
]

MODULAR_TOL = 1e-10


class ConvergenceError(ArithmeticError):
    """The modular equation G(lambda) = 1 could not be solved."""


def modular(values, mass, F: YoungFunction, lam) -> float:
    """G(lam) = sum over cells of Phi(|f| / lam) * mass, compensated."""
    return math.fsum((F(np.abs(values) / lam) * mass).ravel())


def _active(values, mass):
    a = np.abs(np.asarray(values, dtype=float)).ravel()
    m = np.asarray(mass, dtype=float).ravel()
    keep = (a > 0) & (m > 0)
    a, m = a[keep], m[keep]
    if a.size > 64:
        # the modular only sees the distribution of |f|: merge equal values
        a, inv = np.unique(a, return_inverse=True)
        m = np.bincount(inv.ravel(), weights=m, minlength=a.size)
    return a, m


def luxemburg_norm_values(values, mass, F: YoungFunction, tol=MODULAR_TOL) -> float:
    """Luxemburg norm of cell values against cell masses (see :func:`luxemburg_norm`)."""
    a, m = _active(values, mass)
    if a.size == 0:
        return 0.0

    def G(lam):
        return math.fsum(F(a / lam) * m)

    # scale-free starting point: the norm lies between the sup over cells of
    # the single-cell norms and their sum
    single = a * F.phi(m)
    lo = float(single.max())
    hi = float(math.fsum(single))
    if not G(lo) >= 1.0:
        lo_try = lo
        for _ in range(2200):
            lo_try /= 2
            if G(lo_try) >= 1.0:
                break
        lo = lo_try
    grow = 0
    while G(hi) > 1.0:
        hi *= 2
        grow += 1
        if grow > 2200:
            raise ConvergenceError("could not bracket the Luxemburg norm")
    Glo, Ghi = G(lo), G(hi)
    if abs(Glo - 1.0) <= tol:
        return lo
    if abs(Ghi - 1.0) <= tol:
        return hi

    def g(lam):
        return G(lam) - 1.0

    try:
        lam = brentq(g, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=400)
    except (ValueError, RuntimeError) as exc:
        raise ConvergenceError(f"modular root finding failed: {exc}") from exc
    # polish by bisection if the modular tolerance is not yet met
    if abs(G(lam) - 1.0) > tol:
        a_, b_ = lo, hi
        for _ in range(200):
            mid = 0.5 * (a_ + b_)
            Gm = G(mid)
            if abs(Gm - 1.0) <= tol:
                lam = mid
                break
            if Gm > 1.0:
                a_ = mid
            else:
                b_ = mid
        else:
            raise ConvergenceError(f"modular residual {abs(G(lam) - 1.0):.3g} exceeds {tol:g}")
    return lam


def luxemburg_norm(f: GridFunction, W: DyadicWeight, F: YoungFunction, tol=MODULAR_TOL) -> float:
    """inf{lam > 0 : sum_cells Phi(|f| / lam) w(cell) <= 1}.

    Solved for ``|G(lam) - 1| <= tol`` with Brent's method on a bracket
    that always contains the root; the modular is summed with ``math.fsum``.
    """
    if f.grid != W.grid:
        raise ValueError(f"function grid {f.grid} does not match weight grid {W.grid}")
    return luxemburg_norm_values(f.values, W.cell_mass, F, tol)


def power_norm(values, mass, p) -> float:
    """(sum |f|^p w)^(1/p), the closed form of the Power(p) Luxemburg norm."""
    a, m = _active(values, mass)
    if a.size == 0:
        return 0.0
    scale = a.max()
    return float(scale * math.fsum((a / scale) ** p * m) ** (1.0 / p))


def indicator_norm(W: DyadicWeight, F: YoungFunction, E) -> float:
    """Norm of the indicator of the cell set E (boolean mask): phi(w(E))."""
    mask = np.asarray(E, dtype=bool)
    if mask.shape != W.grid.shape:
        raise ValueError(f"cell mask has shape {mask.shape}, grid needs {W.grid.shape}")
    if not mask.any():
        raise ValueError("indicator norm of the empty set is undefined here")
    m = W.mass_of_cells(mask)
    if m <= 0:
        raise ValueError("the set has zero weight")
    return float(F.phi(m))


def atom_luxemburg_norm(W: DyadicWeight, F: YoungFunction, Q: DyadicCube, species=1, family="haar") -> float:
    """Exact Luxemburg norm of the synthesised wavelet psi_Q."""
    return luxemburg_norm(atom(W.grid, Q, species, family), W, F)


def fast_norm(values, mass, F: YoungFunction) -> float:
    """Luxemburg norm with the closed form used for Power functions."""
    if isinstance(F, Power):
        return power_norm(values, mass, F.p)
    return luxemburg_norm_values(values, mass, F)
