"""Integral functionals of a symbol psi and a disk parameter alpha."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .quadrature import (
    QuadConfig,
    QuadResult,
    Region,
    integrate_disk,
    integrate_polar,
    integrate_region,
)
from .symbols import (
    EvaluationError,
    Symbol,
    eval_jet,
    valency_counts,
)


@dataclass(frozen=True)
class SplitIntegrals:
    i2: float
    i3: float
    i4: float
    converged: bool = True


@dataclass(frozen=True)
class ArcSpec:
    center_angle: float
    length: float

    def __post_init__(self):
        if not 0 < self.length <= 2 * math.pi + 1e-12:
            raise ValueError("arc length must lie in (0, 2*pi]")


def _check_alpha(alpha) -> complex:
    alpha = complex(alpha)
    if abs(alpha) >= 1:
        raise ValueError("alpha must lie in the open unit disk")
    return alpha


def _cfg_for(alpha: complex, cfg: QuadConfig | None) -> QuadConfig:
    cfg = cfg or QuadConfig()
    if cfg.singular_refine_threshold is None:
        cfg = cfg.with_(singular_refine_threshold=min(1.0, 10 * (1 - abs(alpha))))
    return cfg


class _JetMemo:
    """eval_jet that reuses the last result when called on the same array."""

    def __init__(self, psi: Symbol):
        self.psi = psi
        self._z = None
        self._jet = None

    def __call__(self, z):
        if z is not self._z:
            self._jet = eval_jet(self.psi, z)
            self._z = z
        return self._jet


def _peak_indicator(jet: _JetMemo, alpha: complex):
    """|1 - conj(alpha) psi| scaled to a z-plane distance.

    Small where the (1 - conj(alpha) psi)^-k kernels peak; used to force
    refinement of panels that could straddle the peak unseen.
    """
    ac = alpha.conjugate()

    def ind(z):
        j = jet(z)
        return np.abs(1 - ac * j.f) / np.maximum(1.0, np.abs(j.d1))

    return ind


def _phi_second(alpha: complex, j) -> np.ndarray:
    ac = alpha.conjugate()
    inv = 1 / (1 - ac * j.f)
    return (abs(alpha) ** 2 - 1) * inv * inv * (j.d2 + 2 * ac * j.d1 * j.d1 * inv)


def kappa(psi: Symbol, alpha, cfg: QuadConfig | None = None) -> QuadResult:
    """L1 norm of (phi_alpha o psi)'' over the disk."""
    alpha = _check_alpha(alpha)
    cfg = _cfg_for(alpha, cfg)
    jet = _JetMemo(psi)
    return integrate_disk(lambda z: np.abs(_phi_second(alpha, jet(z))), cfg, _peak_indicator(jet, alpha))


def _weighted(psi, alpha, cfg, power_d: str, p: int, weight: float) -> QuadResult:
    ac = alpha.conjugate()
    jet = _JetMemo(psi)

    def f(z):
        j = jet(z)
        top = np.abs(j.d2) if power_d == "d2" else np.abs(j.d1) ** 2
        return weight * top / np.abs(1 - ac * j.f) ** p

    return integrate_disk(f, cfg, _peak_indicator(jet, alpha))


def split_integrals(psi: Symbol, alpha, cfg: QuadConfig | None = None) -> SplitIntegrals:
    """The psi''-term, (psi')^2-term and Dirichlet-type term of the boundedness test.

    i2 = (1-|a|^2) int |psi''| / |1 - conj(a) psi|^2
    i3 = (1-|a|^2) int |psi'|^2 / |1 - conj(a) psi|^3
    i4 = (1-|a|^2)^2 int |psi'|^2 / |1 - conj(a) psi|^4
    """
    alpha = _check_alpha(alpha)
    cfg = _cfg_for(alpha, cfg)
    w = 1 - abs(alpha) ** 2
    r2 = _weighted(psi, alpha, cfg, "d2", 2, w)
    r3 = _weighted(psi, alpha, cfg, "d1", 3, w)
    r4 = _weighted(psi, alpha, cfg, "d1", 4, w * w)
    return SplitIntegrals(r2.value, r3.value, r4.value, r2.converged and r3.converged and r4.converged)


def bergman_kappa(psi: Symbol, alpha, cfg: QuadConfig | None = None) -> QuadResult:
    """L1 norm of u_alpha o psi with u_alpha(z) = (1-|a|^2) / (1 - conj(a) z)^3."""
    alpha = _check_alpha(alpha)
    cfg = _cfg_for(alpha, cfg)
    ac = alpha.conjugate()
    w = 1 - abs(alpha) ** 2
    jet = _JetMemo(psi)

    def f(z):
        return w / np.abs(1 - ac * jet(z).f) ** 3

    return integrate_disk(f, cfg, _peak_indicator(jet, alpha))


def angular_ratio(psi: Symbol, alpha) -> float:
    alpha = _check_alpha(alpha)
    v = complex(eval_jet(psi, alpha).f)
    if abs(v) >= 1:
        raise EvaluationError("psi(alpha) lies on or outside the unit circle")
    return ((1 - abs(alpha) ** 2) / (1 - abs(v) ** 2)) ** 2


# ---------------------------------------------------------------- Carleson boxes


def carleson_box(arc: ArcSpec) -> tuple[float, float, float, float]:
    """(r0, r1, theta0, theta1) of the box over an arc; depth |I| / (2 pi)."""
    h = arc.length / (2 * math.pi)
    return 1 - h, 1.0, arc.center_angle - arc.length / 2, arc.center_angle + arc.length / 2


class _ValencyCache:
    """n_psi on nodes, memoized on rounded coordinates (local to one call)."""

    def __init__(self, psi: Symbol, decimals: int = 13):
        self.psi = psi
        self.decimals = decimals
        self.store: dict[tuple[float, float], int] = {}

    def __call__(self, z: np.ndarray) -> np.ndarray:
        flat = z.ravel()
        keys = list(zip(np.round(flat.real, self.decimals).tolist(), np.round(flat.imag, self.decimals).tolist()))
        missing = [i for i, k in enumerate(keys) if k not in self.store]
        if missing:
            counts = valency_counts(self.psi, flat[missing])
            for i, c in zip(missing, counts.tolist()):
                self.store[keys[i]] = c
        return np.array([self.store[k] for k in keys], dtype=float).reshape(z.shape)


def carleson_ratio(psi: Symbol, arc: ArcSpec, cfg: QuadConfig | None = None, _cache=None) -> float:
    """(1 / |I|^2) * integral of n_psi over the Carleson box S(I)."""
    cfg = cfg or QuadConfig(rel_tol=1e-6, base_radial_panels=1, base_angular_panels=1, max_panels=4000)
    counts = _cache or _ValencyCache(psi)
    r0, r1, t0, t1 = carleson_box(arc)
    res = integrate_polar(counts, r0, r1, t0, t1, cfg)
    return res.value / arc.length**2


def dyadic_arcs(depth: int) -> list[ArcSpec]:
    """Arcs of length 2 pi / 2^j, j = 0..depth, in enumeration order."""
    arcs = []
    for j in range(depth + 1):
        n = 2**j
        length = 2 * math.pi / n
        arcs.extend(ArcSpec((k + 0.5) * length, length) for k in range(n))
    return arcs


def carleson_sup(psi: Symbol, cfg: QuadConfig | None = None, dyadic_depth: int = 6) -> tuple[float, ArcSpec]:
    """Max of carleson_ratio over the dyadic arc family; first maximizer wins ties."""
    cache = _ValencyCache(psi)
    best, best_arc = -math.inf, None
    for arc in dyadic_arcs(dyadic_depth):
        v = carleson_ratio(psi, arc, cfg, cache)
        if v > best * (1 + 1e-12):
            best, best_arc = v, arc
    return best, best_arc


# ---------------------------------------------------------------- cone regions


def omega_mass(f: Symbol, region: Region, cfg: QuadConfig | None = None) -> QuadResult:
    """Integral of |f''| over a cone region."""
    cfg = cfg or QuadConfig(rel_tol=1e-8)
    return integrate_region(lambda z: np.abs(eval_jet(f, z).d2), region, cfg)


def stolz_bound(psi: Symbol, beta, w) -> tuple[float, Region]:
    """Lower bound (without the absolute constant) for the mass of
    (phi_alpha o psi)'' on the cone Omega(beta; w; (1-|beta|)/2), alpha = psi(beta).

    Returns ((1-|beta|)/2 * |bracket|, region).
    """
    beta, w = complex(beta), complex(w)
    if abs(beta) >= 1:
        raise ValueError("beta must be interior")
    if abs(w) > 1 + 1e-12:
        raise ValueError("w must lie in the closed disk")
    if abs(w - beta) < (1 - abs(beta)) * (1 - 1e-12):
        raise ValueError("need |w - beta| >= 1 - |beta|")
    jb = eval_jet(psi, beta)
    alpha = complex(jb.f)
    if abs(alpha) >= 1:
        raise EvaluationError("psi(beta) is not inside the disk")
    pw = complex(eval_jet(psi, w).f) if abs(w) < 1 else _boundary_value(psi, w)
    den = 1 - alpha.conjugate() * pw
    if abs(den) <= 1e-14:
        raise EvaluationError("1 - conj(alpha) psi(w) vanishes")
    bracket = abs((alpha - pw) / ((w - beta) * den) - complex(jb.d1) / (abs(alpha) ** 2 - 1))
    s = (1 - abs(beta)) / 2
    return s * bracket, Region(beta, s, w)


def _boundary_value(psi: Symbol, w: complex) -> complex:
    try:
        return complex(eval_jet(psi, w).f)
    except EvaluationError:
        return complex(eval_jet(psi, w * (1 - 1e-12)).f)
