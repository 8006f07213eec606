"""Rearrangements, weighted discrete Lorentz and Marcinkiewicz norms, and
the embedding and optimality experiments built on them."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .young import YoungFunction, dilation

__all__ = [
    "EtaWeight",
    "PowerEta",
    "AlphaHPlus",
    "AlphaHMinus",
    "CoefSequence",
    "lorentz_norm",
    "marcinkiewicz_norm",
    "EmbeddingReport",
    "embedding_check",
    "OptimalityReport",
    "optimality_witness",
]


class EtaWeight:
    """An increasing sequence eta(k), k = 1, 2, ..."""

    def __call__(self, k):
        raise NotImplementedError

    def doubling_constant(self, kmax=1024) -> float:
        """max over k <= kmax of eta(2k)/eta(k)."""
        k = np.arange(1, kmax + 1, dtype=float)
        return float(np.max(self(2 * k) / self(k)))

    def is_increasing(self, kmax=1024) -> bool:
        return bool(np.all(np.diff(self(np.arange(1, kmax + 1, dtype=float))) > 0))


@dataclass(frozen=True)
class PowerEta(EtaWeight):
    """eta(k) = k**exponent; exponent 1/tau gives the classical l^{tau,q}."""

    exponent: float

    def __call__(self, k):
        return np.power(np.asarray(k, dtype=float), self.exponent)


@dataclass(frozen=True)
class AlphaHPlus(EtaWeight):
    """eta(k) = k**alpha * h_phi^+(k)."""

    alpha: float
    young: YoungFunction

    def __call__(self, k):
        k = np.asarray(k, dtype=float)
        return np.power(k, self.alpha) * dilation(self.young, k, "sup")


@dataclass(frozen=True)
class AlphaHMinus(EtaWeight):
    """eta(k) = k**alpha * h_phi^-(k)."""

    alpha: float
    young: YoungFunction

    def __call__(self, k):
        k = np.asarray(k, dtype=float)
        return np.power(k, self.alpha) * dilation(self.young, k, "inf")


@dataclass(frozen=True, eq=False)
class CoefSequence:
    """Finite non-negative sequence with its non-increasing rearrangement."""

    values: np.ndarray = field()

    def __post_init__(self):
        v = np.abs(np.asarray(self.values, dtype=float)).ravel()
        if not np.all(np.isfinite(v)):
            raise ValueError("sequence entries must be finite")
        object.__setattr__(self, "values", v)

    @cached_property
    def order(self):
        """Permutation sorting the values in non-increasing order (stable)."""
        return np.argsort(-self.values, kind="stable")

    @cached_property
    def rearranged(self):
        return self.values[self.order]

    def __len__(self):
        return self.values.size


def lorentz_norm(s, eta: EtaWeight, q=1.0) -> float:
    """[sum_k (eta(k) s*_k)^q / k]^(1/q); ``q = inf`` gives sup_k eta(k) s*_k."""
    if not q > 0:
        raise ValueError(f"Lorentz exponent q must be positive, got {q}")
    seq = s if isinstance(s, CoefSequence) else CoefSequence(s)
    r = seq.rearranged
    r = r[r > 0]
    if r.size == 0:
        return 0.0
    k = np.arange(1, r.size + 1, dtype=float)
    terms = eta(k) * r
    if math.isinf(q):
        return float(terms.max())
    scale = terms.max()
    return float(scale * math.fsum(((terms / scale) ** q / k).tolist()) ** (1.0 / q))


def marcinkiewicz_norm(s, eta: EtaWeight) -> float:
    return lorentz_norm(s, eta, math.inf)


# ---- embeddings -------------------------------------------------------------


@dataclass(frozen=True)
class EmbeddingReport:
    left: float
    middle: float
    right: float

    @property
    def middle_over_left(self):
        return self.middle / self.left if self.left > 0 else math.nan

    @property
    def right_over_middle(self):
        return self.right / self.middle if self.middle > 0 else math.nan


def embedding_check(E, alpha, q, W, F, sigma_mode="support", budget=5000) -> EmbeddingReport:
    """The three norms of the embedding chain for one expansion.

    left  = Lambda^q_{k^alpha h+(k)} of the atom-weighted coefficient sizes,
    middle = approximation-space norm (sigma_{N-1} convention, so the
    ``N = 1`` term is the norm of the function itself),
    right = Lambda^q_{k^alpha h-(k)}.
    The scaling coefficient is not part of the basis and is ignored.
    """
    from .greedy import RankedExpansion, approx_space_norm

    R = RankedExpansion(E, W, F)
    sizes = R.sizes[R.sizes > 0]
    left = lorentz_norm(sizes, AlphaHPlus(alpha, F), q)
    right = lorentz_norm(sizes, AlphaHMinus(alpha, F), q)
    middle = approx_space_norm(
        E, alpha, q, W, F, sigma_mode=sigma_mode, shift=True, budget=budget
    )
    return EmbeddingReport(left, middle, right)


@dataclass(frozen=True)
class OptimalityReport:
    """Witness quantities at one N.

    ``eta_lower`` ~ sigma_N of the 2N-cube normalised brick: any eta with
    Lambda_{k^alpha eta} embedded in the approximation space must satisfy
    eta(N) >~ eta_lower.  ``eta_upper`` is the smallest brick norm found
    among families of N cubes; any eta with the approximation space embedded
    in Lambda_{k^alpha eta} must satisfy eta(N) <~ eta_upper.
    """

    N: int
    tau: float
    eta_lower: float
    eta_upper: float
    h_plus: float
    h_minus: float
    approx_norm: float
    lorentz_witness: float

    @property
    def lower_over_h_plus(self):
        return self.eta_lower / self.h_plus

    @property
    def upper_over_h_minus(self):
        return self.eta_upper / self.h_minus


def optimality_witness(W, F, alpha, q, N, seed=0, families=None, sigma_mode="support") -> OptimalityReport:
    """Build the 2N disjoint-cube witness at the tau nearly attaining
    h_phi^+(N) and evaluate both sides of the optimality argument."""
    from .democracy import brick_expansion, democracy_families, extremal_tau
    from .greedy import approx_space_norm, sigma_N_oracle

    tau, cubes = extremal_tau(W, F, N, "sup", count=2 * N)
    gamma = [(Q, 1) for Q in cubes]
    E = brick_expansion(gamma, W, F)
    sig = sigma_N_oracle(E, N, W, F, mode=sigma_mode, include_scaling=False)
    approx = approx_space_norm(E, alpha, q, W, F, sigma_mode=sigma_mode, shift=True)
    lw = lorentz_norm(np.ones(2 * N), PowerEta(alpha), q)
    if families is None:
        families = democracy_families(W, F, N, trials=8, seed=seed)
    from .democracy import brick_norm

    upper = min(brick_norm(g, W, F).norm for _, g in families)
    return OptimalityReport(
        N=N,
        tau=tau,
        eta_lower=sig,
        eta_upper=upper,
        h_plus=float(dilation(F, N, "sup")),
        h_minus=float(dilation(F, N, "inf")),
        approx_norm=approx,
        lorentz_witness=lw,
    )
