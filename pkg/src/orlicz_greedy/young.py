"""Young functions, the fundamental function of L^Phi(w), dilation functions
and Boyd indices.

Three kinds are supported: ``Power(p)`` with ``Phi(t) = t**p``,
``ZygmundLog(p, a)`` with ``Phi(t) = t**p * log(e + t)**a`` and
``Tabulated`` (a monotone sample table interpolated log-log, with power-law
tails).  Everything is vectorised over numpy arrays and immutable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "YoungFunction",
    "Power",
    "ZygmundLog",
    "Tabulated",
    "FundamentalProfile",
    "InversionError",
    "eval_young",
    "invert_young",
    "fundamental",
    "dilation",
    "boyd_indices",
    "profile",
    "envelope_constant",
    "parse_young",
    "DILATION_GRID",
]

# s-grid for the sup/inf defining h_phi^+ and h_phi^-: [1e-8, 1e8], 64 points per decade
DILATION_GRID = np.logspace(-8.0, 8.0, 16 * 64 + 1)

_MAX_DOUBLINGS = 2200
_BISECTION_STEPS = 80


class InversionError(ArithmeticError):
    """Raised when Phi^{-1}(y) cannot be bracketed or does not converge."""


class YoungFunction:
    """Base class.  Subclasses implement :meth:`__call__` on arrays."""

    inverse_tolerance: float = 1e-12

    def __call__(self, t):
        raise NotImplementedError

    def inverse(self, y):
        return _bisect_inverse(self, y, self.inverse_tolerance)

    def phi(self, t):
        """Fundamental function t -> 1/Phi^{-1}(1/t)."""
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore"):
            return 1.0 / self.inverse(1.0 / t)

    # Power overrides these with closed forms
    def dilation_exponent(self):
        return None


@dataclass(frozen=True)
class Power(YoungFunction):
    p: float
    inverse_tolerance: float = 1e-12

    def __post_init__(self):
        if not (self.p > 1 and math.isfinite(self.p)):
            raise ValueError(f"Power Young function needs 1 < p < inf, got p={self.p}")

    def __call__(self, t):
        return np.power(np.asarray(t, dtype=float), self.p)

    def inverse(self, y):
        return np.power(np.asarray(y, dtype=float), 1.0 / self.p)

    def phi(self, t):
        return np.power(np.asarray(t, dtype=float), 1.0 / self.p)

    def dilation_exponent(self):
        return 1.0 / self.p

    def __str__(self):
        return f"power:p={self.p:g}"


@dataclass(frozen=True)
class ZygmundLog(YoungFunction):
    p: float
    a: float = 1.0
    inverse_tolerance: float = 1e-12

    def __post_init__(self):
        if not (self.p > 1 and math.isfinite(self.p)):
            raise ValueError(f"ZygmundLog needs 1 < p < inf, got p={self.p}")
        if not (self.a >= 0 and math.isfinite(self.a)):
            raise ValueError(f"ZygmundLog needs a >= 0, got a={self.a}")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return np.power(t, self.p) * np.power(np.log(math.e + t), self.a)

    def inverse(self, y):
        # Newton on u = log t: p u + a log log(e + e^u) = log y has slope in
        # [p, p + a], so a fixed number of steps from u = log(y)/p suffices
        y = np.asarray(y, dtype=float)
        scalar = y.ndim == 0
        y = np.atleast_1d(y)
        if np.any(y < 0) or np.any(np.isnan(y)):
            raise ValueError("Phi^{-1} is only defined on [0, inf)")
        out = np.where(np.isinf(y), np.inf, 0.0)
        work = (y > 0) & np.isfinite(y)
        ly = np.log(y[work])
        u = ly / self.p
        for _ in range(40):
            L = np.logaddexp(1.0, u)
            g = self.p * u + self.a * np.log(L) - ly
            dg = self.p + self.a * np.exp(u - L) / L
            step = g / dg
            u = u - step
            if np.all(np.abs(step) < 1e-15 * np.maximum(1.0, np.abs(u))):
                break
        t = np.exp(u)
        yy = y[work]
        if np.any(np.abs(self(t) - yy) > self.inverse_tolerance * np.maximum(yy, 1.0)):
            t = _bisect_inverse(self, yy, self.inverse_tolerance)
        out[work] = t
        return out[0] if scalar else out

    def __str__(self):
        return f"zygmund:p={self.p:g},a={self.a:g}"


@dataclass(frozen=True, eq=False)
class Tabulated(YoungFunction):
    """Monotone table ``(t_i, Phi(t_i))`` interpolated linearly in log-log
    coordinates, extended by ``Phi(t) ~ t**low_exponent`` below the table and
    ``t**high_exponent`` above it."""

    t: np.ndarray
    values: np.ndarray
    low_exponent: float
    high_exponent: float
    inverse_tolerance: float = 1e-12
    _logt: np.ndarray = field(init=False, repr=False)
    _logv: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.ndim != 1 or t.shape != v.shape or t.size < 2:
            raise ValueError("table needs two equal-length columns with at least 2 rows")
        if np.any(t <= 0) or np.any(v <= 0):
            raise ValueError("table entries must be positive (Phi(0)=0 is implicit)")
        if np.any(np.diff(t) <= 0) or np.any(np.diff(v) <= 0):
            raise ValueError("table must be strictly increasing in both columns")
        if not (self.low_exponent >= 1 and self.high_exponent >= 1):
            raise ValueError("tail exponents must be >= 1 for a convex extension")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "_logt", np.log(t))
        object.__setattr__(self, "_logv", np.log(v))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        pos = t > 0
        lt = np.log(t[pos])
        lv = np.interp(lt, self._logt, self._logv)
        lo = lt < self._logt[0]
        hi = lt > self._logt[-1]
        lv[lo] = self._logv[0] + self.low_exponent * (lt[lo] - self._logt[0])
        lv[hi] = self._logv[-1] + self.high_exponent * (lt[hi] - self._logt[-1])
        out[pos] = np.exp(lv)
        return out

    def __hash__(self):
        return id(self)

    def __str__(self):
        return f"table:{len(self.t)} rows"

    @classmethod
    def from_file(cls, path, low_exponent=None, high_exponent=None):
        data = np.loadtxt(path, ndmin=2)
        if data.shape[1] != 2:
            raise ValueError(f"{path}: expected two whitespace-separated columns")
        t, v = data[:, 0], data[:, 1]
        # tails default to the slopes of the end segments
        if low_exponent is None:
            low_exponent = float(np.log(v[1] / v[0]) / np.log(t[1] / t[0]))
        if high_exponent is None:
            high_exponent = float(np.log(v[-1] / v[-2]) / np.log(t[-1] / t[-2]))
        return cls(t, v, low_exponent, high_exponent)


def _bisect_inverse(F, y, tol):
    """Solve Phi(t) = y elementwise: bracket by doubling/halving from 1, then
    bisect geometrically."""
    y = np.asarray(y, dtype=float)
    scalar = y.ndim == 0
    y = np.atleast_1d(y).astype(float)
    if np.any(y < 0) or np.any(np.isnan(y)):
        raise ValueError("Phi^{-1} is only defined on [0, inf)")
    out = np.zeros_like(y)
    inf = np.isinf(y)
    out[inf] = np.inf
    work = (y > 0) & ~inf
    yy = y[work]
    lo = np.ones_like(yy)
    hi = np.ones_like(yy)
    for _ in range(_MAX_DOUBLINGS):
        m = F(hi) < yy
        if not m.any():
            break
        hi[m] *= 2.0
    else:
        raise InversionError("could not bracket Phi^{-1}(y) from above")
    for _ in range(_MAX_DOUBLINGS):
        m = F(lo) > yy
        if not m.any():
            break
        lo[m] *= 0.5
    else:
        raise InversionError("could not bracket Phi^{-1}(y) from below")
    lo = np.minimum(lo, hi * 0.5)
    for _ in range(_BISECTION_STEPS):
        mid = np.sqrt(lo * hi)
        m = F(mid) < yy
        lo = np.where(m, mid, lo)
        hi = np.where(m, hi, mid)
        if np.all(hi <= lo * (1 + 4e-16)):
            break
    t = np.sqrt(lo * hi)
    resid = np.abs(F(t) - yy)
    if np.any(resid > tol * np.maximum(yy, 1.0)):
        raise InversionError("bisection did not converge; malformed Young function")
    out[work] = t
    return out[0] if scalar else out


def eval_young(F: YoungFunction, t):
    """Phi(t) for t >= 0."""
    return F(t)


def invert_young(F: YoungFunction, y):
    """Phi^{-1}(y) for y >= 0."""
    return F.inverse(y)


def fundamental(F: YoungFunction, t):
    """phi(t) = 1/Phi^{-1}(1/t), the L^Phi(w)-norm of an indicator of w-mass t."""
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise ValueError("fundamental function is defined for t > 0")
    return F.phi(t)


_DILATION_CACHE: dict = {}


def _dilation_values(F, ts):
    """Fill the (sup, inf) cache for every t in ``ts``; chunked over t."""
    missing = [t for t in dict.fromkeys(ts) if (F, t) not in _DILATION_CACHE]
    s = DILATION_GRID
    base = F.phi(s)[:, None]
    for i in range(0, len(missing), 64):
        chunk = np.array(missing[i : i + 64])
        ratio = F.phi(np.outer(s, chunk)) / base
        for t, hi, lo in zip(chunk, ratio.max(axis=0), ratio.min(axis=0)):
            _DILATION_CACHE[(F, float(t))] = (float(hi), float(lo))
    return [_DILATION_CACHE[(F, t)] for t in ts]


def dilation(F: YoungFunction, t, mode="sup"):
    """h_phi^+(t) (``mode="sup"``) or h_phi^-(t) (``mode="inf"``).

    Power kinds use the closed form ``t**(1/p)``; otherwise the sup/inf of
    phi(st)/phi(s) is taken over :data:`DILATION_GRID`.
    """
    if mode not in ("sup", "inf"):
        raise ValueError(f"mode must be 'sup' or 'inf', got {mode!r}")
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= 0):
        raise ValueError("dilation functions are defined for t > 0")
    e = F.dilation_exponent()
    if e is not None:
        return np.power(t_arr, e) if t_arr.ndim else float(t_arr ** e)
    pick = 0 if mode == "sup" else 1
    vals = [v[pick] for v in _dilation_values(F, [float(x) for x in t_arr.ravel()])]
    if t_arr.ndim == 0:
        return vals[0]
    return np.array(vals).reshape(t_arr.shape)


def boyd_indices(F: YoungFunction, method="elasticity", t_small=1e-8, t_large=1e8):
    """Estimate the Boyd indices (i_phi, I_phi).

    ``method="endpoint"`` returns log h_phi^+(t)/log t at ``t_small`` and
    ``t_large``.  The quotient converges to the indices only like
    1/log(1/t) when phi carries a logarithmic factor (0.449 instead of 0.5
    for ZygmundLog(2, 1) at t = 1e-8), so the default ``"elasticity"``
    estimator takes the log-slope of phi deep in both tails instead
    (s = 1e-60 and 1e60); the indices are the min/max of the two limits.
    """
    e = F.dilation_exponent()
    if e is not None:
        return e, e
    if method == "endpoint":
        lower = math.log(dilation(F, t_small, "sup")) / math.log(t_small)
        upper = math.log(dilation(F, t_large, "sup")) / math.log(t_large)
    elif method == "elasticity":
        r = 10.0
        slopes = []
        for s in (1e-60, 1e60):
            hi, lo = F.phi(np.array([s * r, s / r]))
            slopes.append(math.log(hi / lo) / (2 * math.log(r)))
        lower, upper = min(slopes), max(slopes)
    else:
        raise ValueError(f"unknown Boyd index estimator {method!r}")
    if not (math.isfinite(lower) and math.isfinite(upper)):
        raise ArithmeticError("degenerate fundamental function: non-finite Boyd index")
    return lower, upper


@dataclass(frozen=True)
class FundamentalProfile:
    young: YoungFunction
    boyd_lower: float
    boyd_upper: float

    def phi(self, t):
        return fundamental(self.young, t)

    def h_plus(self, t):
        return dilation(self.young, t, "sup")

    def h_minus(self, t):
        return dilation(self.young, t, "inf")

    @property
    def p_phi(self):
        """The exponent p^Phi = 1/I_phi of the A_p class the theory asks for."""
        return 1.0 / self.boyd_upper


def profile(F: YoungFunction) -> FundamentalProfile:
    """Bundle phi, h^+-, and the Boyd indices; rejects trivial indices."""
    lo, hi = boyd_indices(F)
    if not (lo > 0 and hi < 1):
        raise ValueError(f"Boyd indices ({lo:.4g}, {hi:.4g}) are not inside (0, 1)")
    return FundamentalProfile(F, lo, hi)


def envelope_constant(F: YoungFunction, eps=0.05, s=None, t=None):
    """Smallest C with phi(st) <= C max(s^(i-eps), s^(I+eps)) phi(t) on a grid."""
    lo, hi = boyd_indices(F)
    s = np.logspace(-6, 6, 97) if s is None else np.asarray(s, dtype=float)
    t = np.logspace(-6, 6, 97) if t is None else np.asarray(t, dtype=float)
    S, T = np.meshgrid(s, t, indexing="ij")
    env = np.maximum(S ** (lo - eps), S ** (hi + eps))
    return float(np.max(F.phi(S * T) / (env * F.phi(T))))


def _parse_options(text):
    opts = {}
    for part in filter(None, (p.strip() for p in text.split(","))):
        if "=" not in part:
            raise ValueError(f"expected key=value, got {part!r}")
        k, v = part.split("=", 1)
        opts[k.strip()] = v.strip()
    return opts


def parse_young(spec: str) -> YoungFunction:
    """Parse ``power:p=2``, ``zygmund:p=2,a=1`` or ``table:<path>[,low=..,high=..]``."""
    kind, _, rest = spec.strip().partition(":")
    kind = kind.lower()
    if kind == "power":
        opts = _parse_options(rest)
        return Power(float(opts.get("p", 2.0)))
    if kind == "zygmund":
        opts = _parse_options(rest)
        return ZygmundLog(float(opts.get("p", 2.0)), float(opts.get("a", 1.0)))
    if kind == "table":
        path, opts = rest, {}
        # trailing ",low=..,high=.." options; the path itself may contain commas
        while "," in path:
            head, tail = path.rsplit(",", 1)
            if "=" not in tail:
                break
            k, v = tail.split("=", 1)
            opts[k.strip()] = float(v)
            path = head
        if not Path(path).exists():
            raise FileNotFoundError(f"Young table not found: {path}")
        return Tabulated.from_file(path, opts.get("low"), opts.get("high"))
    raise ValueError(f"unknown Young function kind {kind!r}")
