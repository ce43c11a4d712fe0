"""Lorentz-space parameters and norms of radial functions.

A radial function is stored as samples on a strictly increasing grid and
interpreted as a piecewise power law between nodes (linear pieces where a
power law is undefined, e.g. across sign changes or zeros).  Superlevel-set
volumes are then available in closed form segment by segment, which makes
distribution functions, rearrangements, and Lorentz norms exact on the
power-function corpus that the rest of the package leans on.

Norms are computed through the layer-cake identity

    ||phi||^s = a_N^(1 - s/p) * p * int_0^inf  lam^(s-1) mu(lam)^(s/p) dlam

(s = sigma < inf), where mu is the exact distribution function of the
interpolant and a_N the unit-ball volume; for sigma = inf the weak form
sup_lam lam (mu(lam)/a_N)^(1/p) is used instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

INF = math.inf

# marker for "vanishes faster than any power" below the grid
INF_DECAY = -math.inf

# exponents below this magnitude are treated as flat segments
_FLAT_EPS = 1e-13


def unit_ball_volume(dimension: int) -> float:
    """Volume of the unit ball in R^N."""
    return math.pi ** (dimension / 2.0) / math.gamma(dimension / 2.0 + 1.0)


def holder_conjugate(r: float) -> float:
    """r' with 1' = inf, inf' = 1, else r/(r-1)."""
    if r == 1:
        return INF
    if r == INF:
        return 1.0
    return r / (r - 1.0)


class LambdaMembershipError(ValueError):
    """Raised when (p, q, sigma, theta) falls outside the admissible set."""


@dataclass(frozen=True)
class LorentzParams:
    """Validated exponent tuple (p, q, sigma, theta).

    p, sigma describe the source space, q, theta the target space.  All
    entries live in [1, inf]; use math.inf for the endpoint.
    """

    p: float
    q: float
    sigma: float
    theta: float

    def __post_init__(self):
        for name in ("p", "q", "sigma", "theta"):
            v = float(getattr(self, name))
            object.__setattr__(self, name, v)
            if math.isnan(v) or not (1.0 <= v):
                raise LambdaMembershipError(f"{name} must lie in [1, inf], got {v}")
        p, q, sigma, theta = self.p, self.q, self.sigma, self.theta
        if p > q:
            raise LambdaMembershipError(f"p <= q required, got p={p} > q={q}")
        if p == 1 and sigma != 1:
            raise LambdaMembershipError("sigma must be 1 when p = 1")
        if p == INF and sigma != INF:
            raise LambdaMembershipError("sigma must be inf when p = inf")
        if q == 1 and theta != 1:
            raise LambdaMembershipError("theta must be 1 when q = 1")
        if q == INF and theta != INF:
            raise LambdaMembershipError("theta must be inf when q = inf")
        if p == q and sigma > theta:
            raise LambdaMembershipError(
                f"sigma <= theta required when p = q, got sigma={sigma} > theta={theta}"
            )

    @property
    def p_conj(self) -> float:
        return holder_conjugate(self.p)

    @property
    def sigma_conj(self) -> float:
        return holder_conjugate(self.sigma)

    def source_pair(self) -> tuple[float, float]:
        return self.p, self.sigma

    def target_pair(self) -> tuple[float, float]:
        return self.q, self.theta

    def label(self) -> str:
        fmt = lambda x: "inf" if x == INF else ("%g" % x)
        return f"({fmt(self.p)},{fmt(self.sigma)})->({fmt(self.q)},{fmt(self.theta)})"


def validate_lambda(p, q, sigma, theta) -> LorentzParams:
    """Validate a full tuple; raises LambdaMembershipError naming the clause."""
    return LorentzParams(p, q, sigma, theta)


def validate_pair(p, sigma) -> tuple[float, float]:
    """Validate a single-space pair (p, sigma), i.e. (p, p, sigma, sigma)."""
    lp = LorentzParams(p, p, sigma, sigma)
    return lp.p, lp.sigma


# ---------------------------------------------------------------------------
# radial profiles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OuterExtension:
    """Behaviour beyond the last grid node.

    kind 'zero' truncates; kind 'power' continues the anchored law
    v_M (r/r_M)^exponent (log r / log r_M)^log_power.
    """

    kind: str = "zero"
    exponent: float = 0.0
    log_power: int = 0

    def __post_init__(self):
        if self.kind not in ("zero", "power"):
            raise ValueError(f"unknown outer extension kind {self.kind!r}")


ZERO_OUTSIDE = OuterExtension("zero")


class RadialProfile:
    """Sampled radial function on r > 0 with power-law extensions.

    Parameters
    ----------
    grid : increasing radii, grid[0] > 0
    values : samples (may be signed; norms act on |phi|)
    dimension : ambient dimension N >= 2
    inner_exponent : power a with phi ~ phi(r_0) (r/r_0)^a below the grid;
        None fits it from the first segment, INF_DECAY means zero there
    outer : OuterExtension describing r > grid[-1]
    """

    def __init__(self, grid, values, dimension, inner_exponent=None,
                 outer: OuterExtension = ZERO_OUTSIDE):
        grid = np.asarray(grid, dtype=float)
        values = np.asarray(values, dtype=float)
        if grid.ndim != 1 or grid.shape != values.shape or grid.size < 2:
            raise ValueError("grid and values must be matching 1-d arrays, size >= 2")
        if grid[0] <= 0.0 or np.any(np.diff(grid) <= 0.0):
            raise ValueError("grid must be strictly increasing with grid[0] > 0")
        if not np.all(np.isfinite(values)):
            raise ValueError("profile values must be finite")
        if dimension < 2:
            raise ValueError("dimension must be >= 2")
        grid = grid.copy()
        values = values.copy()
        grid.setflags(write=False)
        values.setflags(write=False)
        self.grid = grid
        self.values = values
        self.dimension = int(dimension)
        self.outer = outer
        if inner_exponent is None:
            inner_exponent = self._fit_inner_exponent()
        self.inner_exponent = float(inner_exponent)
        self._segments = None

    # -- constructors ---------------------------------------------------------

    @classmethod
    def power(cls, exponent, dimension, r_min=1e-8, r_max=1e4, support=None,
              coefficient=1.0):
        """c r^exponent, optionally truncated to the ball B(0, support)."""
        if support is not None:
            r_max = support
        grid = np.array([r_min, r_max])
        vals = coefficient * grid ** exponent
        outer = ZERO_OUTSIDE if support is not None else OuterExtension("power", exponent)
        return cls(grid, vals, dimension, inner_exponent=exponent, outer=outer)

    @classmethod
    def indicator_ball(cls, radius, dimension, r_min=None):
        """Radial indicator of B(0, radius); exact two-node profile."""
        r_min = radius * 1e-12 if r_min is None else r_min
        return cls(np.array([r_min, radius]), np.array([1.0, 1.0]), dimension,
                   inner_exponent=0.0)

    @classmethod
    def indicator_annulus(cls, r1, r2, dimension):
        """Radial indicator of {r1 < |x| < r2}."""
        if not (0.0 < r1 < r2):
            raise ValueError("need 0 < r1 < r2")
        return cls(np.array([r1, r2]), np.array([1.0, 1.0]), dimension,
                   inner_exponent=INF_DECAY)

    @classmethod
    def from_callable(cls, fn, dimension, r_min=1e-8, r_max=1e4, n_points=2048,
                      inner_exponent=None, outer: OuterExtension = ZERO_OUTSIDE):
        grid = np.geomspace(r_min, r_max, n_points)
        return cls(grid, fn(grid), dimension, inner_exponent, outer)

    def with_values(self, values, inner_exponent=None,
                    outer: OuterExtension | None = None) -> "RadialProfile":
        return RadialProfile(self.grid, values, self.dimension, inner_exponent,
                             self.outer if outer is None else outer)

    def _fit_inner_exponent(self) -> float:
        v0, v1 = self.values[0], self.values[1]
        if v0 == 0.0:
            return INF_DECAY
        if v1 == 0.0 or v0 * v1 < 0.0:
            return 0.0
        return math.log(abs(v1 / v0)) / math.log(self.grid[1] / self.grid[0])

    # -- evaluation -------------------------------------------------------------

    def eval(self, r):
        """Interpolated (signed) values; honours inner/outer extensions."""
        r = np.asarray(r, dtype=float)
        scalar = r.ndim == 0
        r = np.atleast_1d(r)
        out = np.empty_like(r)
        g, v = self.grid, self.values
        idx = np.searchsorted(g, r, side="right") - 1
        inner = idx < 0
        outerm = idx >= g.size - 1
        mid = ~(inner | outerm)
        if np.any(mid):
            i = idx[mid]
            r0, r1 = g[i], g[i + 1]
            v0, v1 = v[i], v[i + 1]
            rm = r[mid]
            res = np.empty(i.shape)
            powok = v0 * v1 > 0.0
            if np.any(powok):
                a = np.log(np.abs(v1[powok] / v0[powok])) / np.log(r1[powok] / r0[powok])
                res[powok] = v0[powok] * (rm[powok] / r0[powok]) ** a
            lin = ~powok
            if np.any(lin):
                w = (rm[lin] - r0[lin]) / (r1[lin] - r0[lin])
                res[lin] = v0[lin] * (1.0 - w) + v1[lin] * w
            out[mid] = res
        if np.any(inner):
            a = self.inner_exponent
            out[inner] = 0.0 if a == INF_DECAY else v[0] * (r[inner] / g[0]) ** a
        if np.any(outerm):
            out[outerm & (r == g[-1])] = v[-1]
            beyond = outerm & (r > g[-1])
            if np.any(beyond):
                if self.outer.kind == "zero" or v[-1] == 0.0:
                    out[beyond] = 0.0
                else:
                    val = v[-1] * (r[beyond] / g[-1]) ** self.outer.exponent
                    if self.outer.log_power:
                        val = val * (np.log(r[beyond]) / np.log(g[-1])) ** self.outer.log_power
                    out[beyond] = val
        return out[0] if scalar else out

    __call__ = eval

    # -- derived profiles ---------------------------------------------------------

    def segments(self) -> "_SegmentSet":
        if self._segments is None:
            self._segments = _build_segments(self)
        return self._segments

    def restrict(self, r_hi, r_lo=0.0) -> "RadialProfile":
        """Zero-extended restriction to the annulus (r_lo, r_hi]."""
        if r_hi <= self.grid[0]:
            sub = np.array([max(r_lo, r_hi * 1e-6), r_hi])
            inner = self.inner_exponent if r_lo == 0.0 else INF_DECAY
            return RadialProfile(sub, self.eval(sub), self.dimension,
                                 inner_exponent=inner)
        mask = (self.grid < r_hi) & (self.grid > r_lo)
        sub = self.grid[mask]
        head = [r_lo] if r_lo > 0.0 else []
        sub = np.concatenate((head, sub, [r_hi]))
        vals = self.eval(sub)
        inner = self.inner_exponent if r_lo == 0.0 else INF_DECAY
        return RadialProfile(sub, vals, self.dimension, inner_exponent=inner,
                             outer=ZERO_OUTSIDE)

    # -- measure-theoretic operations ------------------------------------------------

    def distribution_function(self, lam: float) -> float:
        """Lebesgue measure of {x in R^N : |phi(x)| > lam}."""
        if lam <= 0.0:
            raise ValueError("lambda must be positive")
        return self.segments().measure_above(lam)

    def decreasing_rearrangement(self):
        """The callable s -> phi*(s) = inf{lam > 0 : mu(lam) <= s}."""
        segs = self.segments()

        def phi_star(s):
            s_arr = np.atleast_1d(np.asarray(s, dtype=float))
            out = np.array([segs.rearrangement_at(sv) for sv in s_arr])
            return out[0] if np.ndim(s) == 0 else out

        return phi_star

    def lorentz_norm(self, p, sigma) -> float:
        """||phi||_{L^{p,sigma}} of the zero/power-extended interpolant."""
        p, sigma = validate_pair(p, sigma)
        return self.segments().lorentz_norm(p, sigma)

    def lorentz_norm_on_ball(self, p, sigma, radius) -> float:
        if radius <= 0.0:
            raise ValueError("radius must be positive")
        return self.restrict(radius).lorentz_norm(p, sigma)


# ---------------------------------------------------------------------------
# segment machinery
# ---------------------------------------------------------------------------

_POWER = 0
_LINEAR = 1


class _SegmentSet:
    """|phi| as disjoint monotone segments, each a power law or linear."""

    def __init__(self, dimension, r0, r1, kind, ra, va, expo, slope, icpt):
        self.N = dimension
        self.alpha_N = unit_ball_volume(dimension)
        self.r0 = r0
        self.r1 = r1
        self.kind = kind
        self.ra = ra          # anchor radius for power segments
        self.va = va          # anchor value, > 0
        self.expo = expo
        self.slope = slope    # linear segments: |phi| = icpt + slope r
        self.icpt = icpt
        with np.errstate(over="ignore"):
            self.vol = self.alpha_N * (r1 ** self.N - r0 ** self.N)
        self.vmin, self.vmax = self._value_range()

    def _value_range(self):
        n = self.ra.size
        lo, hi = np.empty(n), np.empty(n)
        for i in range(n):
            a = self._value_at(i, self.r0[i])
            b = self._value_at(i, self.r1[i])
            lo[i], hi[i] = min(a, b), max(a, b)
        return lo, hi

    def _value_at(self, i, r):
        if self.kind[i] == _POWER:
            a = self.expo[i]
            if r == 0.0:
                return INF if a < 0 else (self.va[i] if a == 0 else 0.0)
            if r == INF:
                return INF if a > 0 else (self.va[i] if a == 0 else 0.0)
            return self.va[i] * (r / self.ra[i]) ** a
        return self.icpt[i] + self.slope[i] * r

    def _partial_batch(self, i, lam):
        """Volumes of {|phi| > lam} within segment i; lam array with
        vmin <= lam < vmax (strictly inside the value range)."""
        if self.kind[i] == _POWER:
            a = self.expo[i]
            rstar = self.ra[i] * (lam / self.va[i]) ** (1.0 / a)
            increasing = a > 0
        else:
            rstar = (lam - self.icpt[i]) / self.slope[i]
            increasing = self.slope[i] > 0
        if increasing:
            lo = np.maximum(self.r0[i], rstar)
            hi = np.full_like(lam, self.r1[i])
        else:
            lo = np.full_like(lam, self.r0[i])
            hi = np.minimum(self.r1[i], rstar)
        res = self.alpha_N * (hi ** self.N - lo ** self.N)
        return np.maximum(res, 0.0)

    def mu_batch(self, lam_desc):
        """Exact distribution function at a descending array of levels."""
        m = lam_desc.size
        mu = np.zeros(m)
        base_delta = np.zeros(m + 1)
        neg = -lam_desc  # ascending
        for i in range(self.ra.size):
            lo_pos = np.searchsorted(neg, -self.vmax[i], side="right")
            hi_pos = np.searchsorted(neg, -self.vmin[i], side="right")
            if lo_pos < hi_pos:
                mu[lo_pos:hi_pos] += self._partial_batch(i, lam_desc[lo_pos:hi_pos])
            base_delta[hi_pos] += self.vol[i]
        mu += np.cumsum(base_delta[:-1])
        return mu

    def measure_above(self, lam: float) -> float:
        if np.any((self.vmax == INF) & (self.r1 == INF)):
            return INF
        tail = np.nonzero((self.r1 == INF) & (self.vmax > lam))[0]
        for i in tail:
            if self.vmin[i] >= lam:
                return INF
        return float(self.mu_batch(np.array([lam]))[0])

    def sup_value(self) -> float:
        return float(np.max(self.vmax)) if self.vmax.size else 0.0

    def rearrangement_at(self, s: float) -> float:
        if s < 0:
            raise ValueError("s must be >= 0")
        if self.ra.size == 0:
            return 0.0
        total = float(np.sum(self.vol))
        if math.isfinite(total) and s >= total:
            return 0.0
        vmax = self.sup_value()
        hi = vmax
        if hi == INF:
            hi = max(1.0, float(np.max(self.vmax[np.isfinite(self.vmax)], initial=1.0)))
            while self.measure_above(hi) > s:
                hi *= 4.0
                if hi > 1e300:
                    return INF
        lo = hi
        while self.measure_above(lo) <= s:
            lo /= 4.0
            if lo < 1e-300:
                return 0.0
        return brentq(lambda lam: self.measure_above(lam) - s, lo, hi, rtol=1e-13)

    # -- norms -----------------------------------------------------------------------

    def lorentz_norm(self, p: float, sigma: float) -> float:
        if self.ra.size == 0:
            return 0.0
        if np.any((self.vmax == INF) & (self.r1 == INF)):
            return INF  # growing tail: superlevel sets have infinite measure
        if p == INF:
            return self.sup_value()
        if sigma == INF:
            return self._weak_norm(p)
        return self._strong_norm(p, sigma)

    def _levels(self):
        vals = np.concatenate([self.vmin, self.vmax])
        vals = vals[np.isfinite(vals) & (vals > 0.0)]
        return np.unique(vals)[::-1]

    def _strong_norm(self, p, sigma):
        levels = self._levels()
        if levels.size == 0:
            return 0.0
        acc = 0.0
        singular = np.nonzero(self.vmax == INF)[0]
        if singular.size:
            acc = self._top_tail(singular, levels[0], p, sigma)
            if acc == INF:
                return INF
        if levels.size > 1:
            n_gl = 24 if levels.size <= 192 else 8
            nodes, weights = _gauss_nodes(n_gl)
            u_hi, u_lo = _subdivide_log(np.log(levels[:-1]), np.log(levels[1:]))
            half = 0.5 * (u_hi - u_lo)
            mid = 0.5 * (u_hi + u_lo)
            # descending lambda nodes across all intervals at once
            u_all = (mid[:, None] + half[:, None] * nodes[None, ::-1]).ravel()
            w_all = (half[:, None] * weights[None, ::-1]).ravel()
            lam = np.exp(u_all)
            mu = self.mu_batch(lam)
            acc += p * float(np.sum(w_all * lam ** sigma * mu ** (sigma / p)))
        acc += self._bottom_piece(levels[-1], p, sigma)
        if acc == INF or not math.isfinite(acc):
            return INF
        return (self.alpha_N ** (1.0 - sigma / p) * acc) ** (1.0 / sigma)

    def _top_tail(self, singular, lam0, p, sigma):
        """p * int_{lam0}^inf lam^(sigma-1) mu^(sigma/p) dlam, closed form.

        Only the inner extension can be singular, so mu is the pure power
        a_N (ra (lam/va)^(1/a))^N there.  Assembled in logs: nearly flat
        negative exponents make the individual powers overflow even though
        the combined term is tiny.
        """
        acc = 0.0
        for i in singular:
            if self.kind[i] != _POWER or self.expo[i] >= 0 or self.r0[i] > 0.0:
                return INF
            a = self.expo[i]
            e = sigma - 1.0 + (self.N * sigma) / (p * a)
            if e >= -1.0:
                return INF
            log_term = (
                math.log(p)
                + (sigma / p) * (math.log(self.alpha_N) + self.N * math.log(self.ra[i]))
                + sigma * math.log(lam0)
                + (self.N * sigma) / (p * a) * (math.log(lam0) - math.log(self.va[i]))
                - math.log(-(e + 1.0))
            )
            if log_term > 700.0:
                return INF
            acc += math.exp(log_term) if log_term > -700.0 else 0.0
        return acc

    def _bottom_piece(self, lam_min, p, sigma):
        """p * int_0^{lam_min} lam^(sigma-1) mu^(sigma/p) dlam."""
        tail = np.nonzero((self.r1 == INF) & (self.vmax <= lam_min) &
                          (self.kind == _POWER) & (self.expo < 0))[0]
        if tail.size == 0:
            # mu is bounded near 0; substitute u = lam^sigma
            nodes, weights = _gauss_nodes(24)
            u1 = lam_min ** sigma
            u = 0.5 * u1 * (nodes + 1.0)
            lam = u ** (1.0 / sigma)
            order = np.argsort(-lam)
            mu = np.empty_like(lam)
            mu[order] = self.mu_batch(lam[order])
            return (p / sigma) * float(np.sum(weights * mu ** (sigma / p))) * 0.5 * u1
        # decaying outer tail: mu(lam) = R(lam) + c lam^(N/a), R bounded
        i = int(tail[0])
        a = self.expo[i]
        e = sigma - 1.0 + (self.N * sigma) / (p * a)
        if e <= -1.0:
            return INF
        c = self.alpha_N * self.ra[i] ** self.N * self.va[i] ** (-self.N / a)
        r_rest = float(np.sum(self.vol[np.arange(self.vol.size) != i]))
        r0_corr = self.alpha_N * self.r0[i] ** self.N
        rest = r_rest - r0_corr
        lam_c = lam_min
        while c * lam_c ** (self.N / a) < 1e4 * max(abs(rest), 1e-300) and lam_c > 1e-280:
            lam_c *= 0.5
        acc = 0.0
        if lam_c < lam_min:
            nodes, weights = _gauss_nodes(24)
            u_hi, u_lo = _subdivide_log(np.array([math.log(lam_min)]),
                                        np.array([math.log(lam_c)]))
            half = 0.5 * (u_hi - u_lo)
            mid = 0.5 * (u_hi + u_lo)
            u_all = (mid[:, None] + half[:, None] * nodes[None, ::-1]).ravel()
            w_all = (half[:, None] * weights[None, ::-1]).ravel()
            lam = np.exp(u_all)
            mu = self.mu_batch(lam)
            acc += p * float(np.sum(w_all * lam ** sigma * mu ** (sigma / p)))
        # asymptotic piece with a first-order binomial correction in R/c lam^beta
        s_p = sigma / p
        beta = self.N / a
        lead = c ** s_p * lam_c ** (e + 1.0) / (e + 1.0)
        corr_exp = e - beta
        corr = s_p * c ** (s_p - 1.0) * rest * lam_c ** (corr_exp + 1.0) / (corr_exp + 1.0)
        acc += p * (lead + corr)
        return acc

    def _weak_norm(self, p):
        levels = self._levels()
        if levels.size == 0:
            return 0.0
        for i in np.nonzero(self.vmax == INF)[0]:
            # singular end: lam mu(lam)^(1/p) ~ lam^(1 + N/(a p)) as lam -> inf
            if self.expo[i] >= 0 or 1.0 + self.N / (self.expo[i] * p) > 0:
                return INF
        # mu jumps at the levels; sample just below each to capture the sup
        cand = [levels, levels * (1.0 - 1e-12)]
        for j in range(levels.size - 1):
            lo, hi = levels[j + 1], levels[j]
            cand.append(np.exp(np.linspace(math.log(hi), math.log(lo), 10)[1:-1]))
        for i in np.nonzero((self.r1 == INF) & (self.expo < 0) & (self.kind == _POWER))[0]:
            if 1.0 + self.N / (self.expo[i] * p) < 0:
                return INF  # decaying tail too heavy for weak-L^p
            cand.append(levels[-1] * np.exp(-np.arange(1.0, 60.0, 3.0)))
        lam = np.unique(np.concatenate(cand))[::-1]
        mu = self.mu_batch(lam)
        return float(np.max(lam * (mu / self.alpha_N) ** (1.0 / p)))


def _subdivide_log(u_hi, u_lo, max_width=1.15):
    """Split [u_lo, u_hi] interval arrays so no piece exceeds max_width
    (half a decade in lambda), keeping the overall descending order."""
    his, los = [], []
    for hi, lo in zip(u_hi, u_lo):
        width = hi - lo
        if width <= max_width:
            his.append(hi)
            los.append(lo)
            continue
        n = int(math.ceil(width / max_width))
        cuts = np.linspace(hi, lo, n + 1)
        his.extend(cuts[:-1])
        los.extend(cuts[1:])
    return np.asarray(his), np.asarray(los)


_GAUSS_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gauss_nodes(n):
    if n not in _GAUSS_CACHE:
        _GAUSS_CACHE[n] = np.polynomial.legendre.leggauss(n)
    return _GAUSS_CACHE[n]


def _build_segments(profile: RadialProfile) -> _SegmentSet:
    g = profile.grid
    v = profile.values
    r0l, r1l, kindl, ral, val, expol, slopel, icptl = [], [], [], [], [], [], [], []

    def add_power(r0, r1, ra, va, a):
        if va == 0.0:
            return
        r0l.append(r0); r1l.append(r1); kindl.append(_POWER)
        ral.append(ra); val.append(abs(va)); expol.append(a)
        slopel.append(0.0); icptl.append(0.0)

    def add_linear(r0, r1, y0, y1):
        if y0 == 0.0 and y1 == 0.0:
            return
        m = (y1 - y0) / (r1 - r0)
        r0l.append(r0); r1l.append(r1); kindl.append(_LINEAR)
        ral.append(r0); val.append(max(y0, y1)); expol.append(0.0)
        slopel.append(m); icptl.append(y0 - m * r0)

    a_in = profile.inner_exponent
    if v[0] != 0.0 and a_in != INF_DECAY:
        add_power(0.0, g[0], g[0], v[0], a_in)

    for i in range(g.size - 1):
        r0, r1, v0, v1 = g[i], g[i + 1], v[i], v[i + 1]
        if v0 == 0.0 and v1 == 0.0:
            continue
        if v0 * v1 > 0.0:
            a = math.log(abs(v1 / v0)) / math.log(r1 / r0)
            if abs(a) < _FLAT_EPS:
                a = 0.0
            add_power(r0, r1, r0, abs(v0), a)
        elif v0 * v1 < 0.0:
            rc = r0 + (r1 - r0) * v0 / (v0 - v1)
            add_linear(r0, rc, abs(v0), 0.0)
            add_linear(rc, r1, 0.0, abs(v1))
        else:
            add_linear(r0, r1, abs(v0), abs(v1))

    if profile.outer.kind == "power" and v[-1] != 0.0:
        if profile.outer.log_power != 0:
            raise NotImplementedError(
                "norms across log-power outer tails: restrict to a ball first")
        add_power(g[-1], INF, g[-1], abs(v[-1]), profile.outer.exponent)

    return _SegmentSet(
        profile.dimension,
        np.asarray(r0l), np.asarray(r1l), np.asarray(kindl, dtype=int),
        np.asarray(ral), np.asarray(val), np.asarray(expol),
        np.asarray(slopel), np.asarray(icptl),
    )


# ---------------------------------------------------------------------------
# module-level operations mirroring the profile methods
# ---------------------------------------------------------------------------


def distribution_function(phi: RadialProfile, lam: float) -> float:
    return phi.distribution_function(lam)


def decreasing_rearrangement(phi: RadialProfile):
    return phi.decreasing_rearrangement()


def lorentz_norm(phi: RadialProfile, p, sigma) -> float:
    return phi.lorentz_norm(p, sigma)


def lorentz_norm_on_ball(phi: RadialProfile, p, sigma, radius) -> float:
    return phi.lorentz_norm_on_ball(p, sigma, radius)


def power_membership(exponent: float, p: float, sigma: float, dimension: int) -> bool:
    """Whether r^exponent lies in L^{p,sigma} of a ball around the origin."""
    p, sigma = validate_pair(p, sigma)
    if p == INF:
        return exponent >= 0.0
    s = p * exponent + dimension
    return s > 0.0 if sigma < INF else s >= 0.0


def power_norm_asymptotic(exponent, p, sigma, t, dimension) -> float:
    """Reference envelope t^(A/2 + N/(2p)) for ||r^A||_{L^{p,sigma}(B(0,sqrt t))}."""
    p, sigma = validate_pair(p, sigma)
    if not power_membership(exponent, p, sigma, dimension):
        raise LambdaMembershipError(
            f"r^{exponent} not in L^({p},{sigma}) near the origin in dimension {dimension}")
    np_over = 0.0 if p == INF else dimension / (2.0 * p)
    return t ** (exponent / 2.0 + np_over)
