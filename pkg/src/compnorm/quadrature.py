"""Adaptive quadrature on the unit disk and on cone regions.

All integrals are with respect to normalized area measure dA = dx dy / pi.

Domains are described in local polar form around a center c,

    z = c + t * rho(phi) * exp(i phi),   t0 <= t <= t1,  phi0 <= phi <= phi1,

so the unit disk (c = 0, rho = 1), annular sectors and the convex hull of
a disk and a point (star-shaped about the disk center) share one engine.
Panels are tensor Gauss-Legendre rules (8 radial x 16 angular nodes); the
error of a panel is the difference between its own rule and the sum over
its four children, and the reported value is the child sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

RADIAL_ORDER = 8
ANGULAR_ORDER = 16
DORFLER_FRACTION = 0.5


@dataclass(frozen=True)
class QuadConfig:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-13
    max_panels: int = 40000
    base_radial_panels: int = 4
    base_angular_panels: int = 8
    singular_refine_threshold: float | None = None

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("rel_tol and abs_tol must be positive")
        if self.base_radial_panels < 1 or self.base_angular_panels < 1:
            raise ValueError("base panel counts must be positive")
        if self.max_panels < self.base_radial_panels * self.base_angular_panels:
            raise ValueError("max_panels is smaller than the base panel grid")

    def with_(self, **kw) -> "QuadConfig":
        return QuadConfig(**{**self.__dict__, **kw})


@dataclass(frozen=True)
class QuadResult:
    value: float
    error_estimate: float
    panels_used: int
    converged: bool


def _gl01(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    return (x + 1) / 2, w / 2


_XR, _WR = _gl01(RADIAL_ORDER)
_XA, _WA = _gl01(ANGULAR_ORDER)
_W2 = np.outer(_WR, _WA)

# child k covers (t half, phi half) = (k // 2, k % 2)
_CHILD_T = np.array([0.0, 0.0, 0.5, 0.5])
_CHILD_P = np.array([0.0, 0.5, 0.0, 0.5])


class _PolarDomain:
    """z = center + t * rho(phi) * exp(i phi)."""

    def __init__(self, center: complex = 0j, rho: Callable | None = None):
        self.center = complex(center)
        self.rho = rho

    def nodes(self, t0, t1, p0, p1):
        """Nodes and dA-weights for panels given as 1-D arrays."""
        dt = (t1 - t0)[:, None]
        dp = (p1 - p0)[:, None]
        t = t0[:, None] + dt * _XR[None, :]
        phi = p0[:, None] + dp * _XA[None, :]
        rho = np.ones_like(phi) if self.rho is None else self.rho(phi)
        z = self.center + t[:, :, None] * (rho * np.exp(1j * phi))[:, None, :]
        jac = t[:, :, None] * (rho * rho)[:, None, :]
        w = (dt * dp)[:, :, None] * _W2[None, :, :] * jac / math.pi
        return z, w, rho


def _panel_sums(f, domain, t0, t1, p0, p1):
    if t0.size == 0:
        return np.zeros(0), np.zeros(0), np.zeros(0)
    z, w, rho = domain.nodes(t0, t1, p0, p1)
    vals = np.asarray(f(z), dtype=float)
    if vals.shape != z.shape:
        vals = np.broadcast_to(vals, z.shape)
    if not np.all(np.isfinite(vals)):
        raise FloatingPointError("integrand returned a non-finite value")
    sums = np.einsum("nij,nij->n", vals, w)
    diam = (t1 - t0) * rho.max(axis=1) + t1 * rho.max(axis=1) * (p1 - p0)
    return sums, z, diam


def _children(t0, t1, p0, p1):
    ht = (t1 - t0) / 2
    hp = (p1 - p0) / 2
    ct0 = (t0[:, None] + ht[:, None] * 2 * _CHILD_T[None, :]).ravel()
    cp0 = (p0[:, None] + hp[:, None] * 2 * _CHILD_P[None, :]).ravel()
    return ct0, ct0 + np.repeat(ht, 4), cp0, cp0 + np.repeat(hp, 4)


def _integrate_panels(f, domain, t0, t1, p0, p1, cfg: QuadConfig, indicator=None) -> QuadResult:
    """Adaptive refinement starting from the given base panels."""
    threshold = cfg.singular_refine_threshold

    def expand(t0, t1, p0, p1):
        ct0, ct1, cp0, cp1 = _children(t0, t1, p0, p1)
        csum, cz, _ = _panel_sums(f, domain, ct0, ct1, cp0, cp1)
        child = csum.reshape(-1, 4)
        if indicator is not None and threshold is not None and t0.size:
            ind = np.asarray(indicator(cz), dtype=float).reshape(t0.size, -1).min(axis=1)
        else:
            ind = None
        return child, ind

    coarse, _, diam = _panel_sums(f, domain, t0, t1, p0, p1)
    child, ind = expand(t0, t1, p0, p1)
    evaluated = t0.size * 5

    while True:
        fine = child.sum(axis=1)
        err = np.abs(fine - coarse)
        total = math.fsum(fine)
        err_total = math.fsum(err)
        tol = max(cfg.abs_tol, cfg.rel_tol * abs(total))

        forced = np.zeros(t0.size, dtype=bool)
        if ind is not None:
            diam = (t1 - t0) + t1 * (p1 - p0)
            forced = (ind < threshold) & (diam > np.maximum(ind, 1e-3 * threshold))
        if err_total <= tol and not forced.any():
            return QuadResult(total, err_total, int(t0.size), True)

        marked = forced.copy()
        if err_total > tol:
            order = np.argsort(-err, kind="stable")
            cum = np.cumsum(err[order])
            k = int(np.searchsorted(cum, DORFLER_FRACTION * err_total)) + 1
            marked[order[:k]] = True
        room = (cfg.max_panels - t0.size) // 3
        idx = np.nonzero(marked)[0]
        if room <= 0 or idx.size == 0:
            converged = err_total <= tol
            return QuadResult(total, err_total if converged else 10 * err_total, int(t0.size), converged)
        if idx.size > room:
            keep = np.argsort(-err[idx], kind="stable")[:room]
            idx = np.sort(idx[keep])

        keep_mask = np.ones(t0.size, dtype=bool)
        keep_mask[idx] = False
        nt0, nt1, np0, np1 = _children(t0[idx], t1[idx], p0[idx], p1[idx])
        ncoarse = child[idx].ravel()
        nchild, nind = expand(nt0, nt1, np0, np1)
        evaluated += nt0.size * 4

        t0 = np.concatenate([t0[keep_mask], nt0])
        t1 = np.concatenate([t1[keep_mask], nt1])
        p0 = np.concatenate([p0[keep_mask], np0])
        p1 = np.concatenate([p1[keep_mask], np1])
        coarse = np.concatenate([coarse[keep_mask], ncoarse])
        child = np.concatenate([child[keep_mask], nchild])
        if ind is not None:
            ind = np.concatenate([ind[keep_mask], nind])


def _grid(t_breaks, p_breaks):
    t_breaks = np.asarray(t_breaks, dtype=float)
    p_breaks = np.asarray(p_breaks, dtype=float)
    T0, P0 = np.meshgrid(t_breaks[:-1], p_breaks[:-1], indexing="ij")
    T1, P1 = np.meshgrid(t_breaks[1:], p_breaks[1:], indexing="ij")
    return T0.ravel(), T1.ravel(), P0.ravel(), P1.ravel()


def _dyadic_breaks(t0: float, t1: float, n: int) -> np.ndarray:
    """n panels on [t0, t1], halving toward t1."""
    gaps = [0.5 ** (j + 1) for j in range(n - 1)]
    pts = [t0] + [t1 - (t1 - t0) * g for g in gaps] + [t1]
    return np.array(pts)


def integrate_disk(integrand, cfg: QuadConfig | None = None, indicator=None) -> QuadResult:
    """Integral of a vectorized real integrand over the unit disk (dA normalized).

    ``indicator`` optionally maps nodes to a nonnegative distance-like
    quantity; panels whose smallest node value falls below
    ``cfg.singular_refine_threshold`` are split until their size drops
    below half that value, so narrow peaks are never skipped by the
    error estimator.
    """
    cfg = cfg or QuadConfig()
    return integrate_polar(integrand, 0.0, 1.0, 0.0, 2 * math.pi, cfg, indicator=indicator)


def integrate_polar(integrand, r0, r1, theta0, theta1, cfg: QuadConfig | None = None, indicator=None) -> QuadResult:
    """Integral over the polar rectangle r0 <= |z| <= r1, theta0 <= arg z <= theta1."""
    cfg = cfg or QuadConfig()
    tb = _dyadic_breaks(r0, r1, cfg.base_radial_panels)
    pb = np.linspace(theta0, theta1, cfg.base_angular_panels + 1)
    return _integrate_panels(integrand, _PolarDomain(), *_grid(tb, pb), cfg, indicator)


# ---------------------------------------------------------------- regions


@dataclass(frozen=True)
class Region:
    """Convex hull of the closed disk |z - center| <= radius and the apex."""

    center: complex
    radius: float
    apex: complex

    def __post_init__(self):
        c, w, s = complex(self.center), complex(self.apex), float(self.radius)
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "apex", w)
        object.__setattr__(self, "radius", s)
        if not s > 0:
            raise ValueError("region radius must be positive")
        if abs(c) + s > 1 + 1e-12:
            raise ValueError("region disk must lie in the closed unit disk")
        if abs(w) > 1 + 1e-12:
            raise ValueError("apex must lie in the closed unit disk")
        if s > 0.5 * abs(w - c) * (1 + 1e-12):
            raise ValueError("radius must not exceed half the apex distance")

    @classmethod
    def omega_r(cls, r: float) -> "Region":
        """The cone region of radius r about 0 with apex 1."""
        return cls(0j, r, 1 + 0j)

    @property
    def _geometry(self):
        d = abs(self.apex - self.center)
        phi_w = math.atan2((self.apex - self.center).imag, (self.apex - self.center).real)
        gamma = math.acos(self.radius / d)
        return d, phi_w, gamma

    def area(self) -> float:
        """Euclidean area of the hull (not normalized)."""
        d, _, gamma = self._geometry
        s = self.radius
        return s * s * (math.pi - gamma) + s * math.sqrt(d * d - s * s)

    def radial(self, phi):
        """Distance from the center to the hull boundary along direction phi."""
        _, phi_w, gamma = self._geometry
        s = self.radius
        delta = np.angle(np.exp(1j * (np.asarray(phi) - phi_w)))
        off = gamma - np.abs(delta)
        cosv = np.cos(np.clip(off, 0.0, None))
        return np.where(off > 0, s / cosv, s)


def region_contains(region: Region, z) -> bool:
    """Whether z lies in the hull of the region's disk and its apex.

    z is in the hull iff some point of the disk lies on the ray that starts
    at z and points away from the apex.
    """
    z = complex(z)
    c, s, w = region.center, region.radius, region.apex
    slack = 1e-12
    if abs(z - c) <= s + slack:
        return True
    zw = z - w
    if abs(zw) <= slack:
        return True
    u = zw / abs(zw)
    v = c - z
    proj = (v * u.conjugate()).real
    dist = abs(v) if proj <= 0 else abs(v - proj * u)
    return dist <= s + slack


def integrate_region(integrand, region: Region, cfg: QuadConfig | None = None, indicator=None) -> QuadResult:
    """Integral over a cone region, on panels conforming to its boundary."""
    cfg = cfg or QuadConfig()
    _, phi_w, gamma = region._geometry
    cuts = [phi_w - math.pi, phi_w - gamma, phi_w, phi_w + gamma, phi_w + math.pi]
    per = max(1, cfg.base_angular_panels // 4)
    pb = np.concatenate([np.linspace(a, b, per + 1)[:-1] for a, b in zip(cuts[:-1], cuts[1:])] + [[cuts[-1]]])
    tb = np.linspace(0.0, 1.0, cfg.base_radial_panels + 1)
    domain = _PolarDomain(region.center, region.radial)
    return _integrate_panels(integrand, domain, *_grid(tb, pb), cfg, indicator)


def integrate_about(integrand, center: complex, cfg: QuadConfig | None = None, indicator=None) -> QuadResult:
    """Integral over the unit disk in polar coordinates about an interior point.

    Removes 1/|z - center| singularities through the Jacobian.
    """
    cfg = cfg or QuadConfig()
    a = complex(center)
    if abs(a) >= 1:
        raise ValueError("center must be interior")

    def rho(phi):
        proj = (np.conj(a) * np.exp(1j * phi)).real
        return -proj + np.sqrt(proj * proj + 1 - abs(a) ** 2)

    tb = _dyadic_breaks(0.0, 1.0, cfg.base_radial_panels)
    pb = np.linspace(0.0, 2 * math.pi, cfg.base_angular_panels + 1)
    return _integrate_panels(integrand, _PolarDomain(a, rho), *_grid(tb, pb), cfg, indicator)


# ---------------------------------------------------------------- Monte Carlo

MC_CHUNK = 1 << 17


def monte_carlo_disk(integrand, n_samples: int, seed: int) -> tuple[float, float]:
    """Uniform-sampling estimate (value, standard error) of the dA integral.

    Samples are drawn in fixed-size chunks, each from its own child of a
    SeedSequence, so the result depends only on (n_samples, seed).
    """
    if n_samples < 1000:
        raise ValueError("n_samples must be at least 1000")
    ss = np.random.SeedSequence(seed)
    n_chunks = -(-n_samples // MC_CHUNK)
    total = 0.0
    total_sq = 0.0
    for k, child in enumerate(ss.spawn(n_chunks)):
        m = min(MC_CHUNK, n_samples - k * MC_CHUNK)
        rng = np.random.Generator(np.random.PCG64(child))
        u = rng.random((2, m))
        z = np.sqrt(u[0]) * np.exp(2j * math.pi * u[1])
        vals = np.asarray(integrand(z), dtype=float)
        vals = np.broadcast_to(vals, z.shape)
        total += math.fsum(vals)
        total_sq += math.fsum(vals * vals)
    mean = total / n_samples
    var = max(total_sq / n_samples - mean * mean, 0.0)
    if var <= 1e-30 * max(mean * mean, 1e-300):
        var = 0.0
    return mean, math.sqrt(var / (n_samples - 1)) if var else 0.0


# ---------------------------------------------------------------- series oracle

SERIES_BLOCK = 8192


def series_kernel_integral(alpha, p: float) -> float:
    """Integral of |1 - conj(alpha) z|^(-p) over the disk, by power series.

    Sums c_k^2 |alpha|^(2k) / (k + 1) with c_k = Gamma(k + p/2) / (Gamma(p/2) k!),
    stopping once a geometric majorant of the tail is below 1e-12 of the
    partial sum.
    """
    alpha = complex(alpha)
    x = abs(alpha) ** 2
    if x >= 1:
        raise ValueError("series_kernel_integral needs |alpha| < 1")
    if not p > 0:
        raise ValueError("p must be positive")
    if x == 0:
        return 1.0
    a = p / 2
    total = 0.0
    c = 1.0  # c_k^2 x^k, carried across blocks
    k0 = 0
    while True:
        k = np.arange(k0, k0 + SERIES_BLOCK, dtype=float)
        ratio = ((k + a) / (k + 1)) ** 2 * x
        run = np.concatenate([[c], c * np.cumprod(ratio)])
        terms = run[:-1] / (k + 1)
        total += math.fsum(terms)
        c = run[-1]
        k_last = k[-1]
        q = x * max(1.0, ((k_last + a) / (k_last + 1)) ** 2)
        if q < 1:
            tail = terms[-1] * q / (1 - q)
            if tail <= 1e-12 * total:
                return total
        k0 += SERIES_BLOCK
        if c == 0.0:
            return total
