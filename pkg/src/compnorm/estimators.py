"""Sweeps over alpha, tail-sup essential-norm proxies and theorem-level checks."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from . import functionals as fn
from .quadrature import QuadConfig, QuadResult, Region, integrate_about, integrate_disk, series_kernel_integral
from .symbols import (
    Blaschke,
    EvaluationError,
    Symbol,
    boundary_preimages,
    eval_jet,
    make_blaschke,
    preimages,
)

GOLDEN = (math.sqrt(5) - 1) / 2

# Quadrature settings used by the sweeps unless the caller passes its own.
SWEEP_CFG = QuadConfig(rel_tol=1e-5, abs_tol=1e-12)


@dataclass(frozen=True)
class SweepPoint:
    alpha: complex
    value: float
    error: float
    converged: bool = True


@dataclass(frozen=True)
class AlphaSweep:
    points: list

    @property
    def sup(self) -> SweepPoint:
        return max(self.points, key=lambda p: p.value)

    def per_radius_sup(self) -> dict:
        out: dict[float, float] = {}
        for p in self.points:
            r = round(abs(p.alpha), 15)
            out[r] = max(out.get(r, -math.inf), p.value)
        return out


def _sort_key(a: complex):
    return (abs(a), cmath.phase(a) % (2 * math.pi))


def boundedness_profile(psi: Symbol, radii, angles_per_radius: int = 16, cfg: QuadConfig | None = None) -> AlphaSweep:
    """kappa on the polar grid {r e^(2 pi i j / M)}; failures are recorded, not raised."""
    cfg = cfg or SWEEP_CFG
    pts = []
    for r in radii:
        if not 0 < r < 1:
            raise ValueError("radii must lie in (0, 1)")
        for j in range(angles_per_radius):
            a = r * cmath.exp(2j * math.pi * j / angles_per_radius)
            try:
                res = fn.kappa(psi, a, cfg)
                pts.append(SweepPoint(a, res.value, res.error_estimate, res.converged))
            except (EvaluationError, FloatingPointError):
                pts.append(SweepPoint(a, math.nan, math.inf, False))
    pts.sort(key=lambda p: _sort_key(p.alpha))
    return AlphaSweep(pts)


# ---------------------------------------------------------------- essential norm


@dataclass(frozen=True)
class EssNormEstimate:
    schedule: list
    tail_sups: list
    errors: list
    proxy: float
    converged: bool
    diagnostics: str
    argmax_angles: list = field(default_factory=list)
    quadrature_converged: bool = True


def default_schedule(K: int = 13, k0: int = 3) -> list:
    if not k0 <= K <= 13:
        raise ValueError("schedule depth K must satisfy 3 <= K <= 13")
    return [1 - 2.0**-k for k in range(k0, K + 1)]


def _circle_sup(psi, s, angles, cfg, golden_iters):
    """Sup of kappa over |alpha| = s: equispaced scan, then golden-section
    refinement on the bracket around the best sample."""
    cache: dict[float, QuadResult] = {}
    ok = True

    def val(theta):
        nonlocal ok
        key = round(theta % (2 * math.pi), 15)
        if key not in cache:
            try:
                cache[key] = fn.kappa(psi, s * cmath.exp(1j * theta), cfg)
            except (EvaluationError, FloatingPointError):
                cache[key] = QuadResult(math.nan, math.inf, 0, False)
            ok = ok and cache[key].converged
        return cache[key].value

    h = 2 * math.pi / angles
    thetas = [j * h for j in range(angles)]
    vals = [val(t) for t in thetas]
    finite = [v if math.isfinite(v) else -math.inf for v in vals]
    j = int(np.argmax(finite))
    lo, hi = thetas[j] - h, thetas[j] + h
    x1 = hi - GOLDEN * (hi - lo)
    x2 = lo + GOLDEN * (hi - lo)
    f1, f2 = val(x1), val(x2)
    for _ in range(golden_iters):
        if f1 >= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - GOLDEN * (hi - lo)
            f1 = val(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + GOLDEN * (hi - lo)
            f2 = val(x2)
    best_key = max((k for k in cache if math.isfinite(cache[k].value)), key=lambda k: cache[k].value, default=None)
    if best_key is None:
        return math.nan, math.inf, False, math.nan
    best = cache[best_key]
    return best.value, best.error_estimate, ok, best_key


def essential_norm_proxy(
    psi: Symbol,
    schedule=None,
    angles: int = 64,
    cfg: QuadConfig | None = None,
    conv_tol: float = 0.01,
    golden_iters: int = 12,
) -> EssNormEstimate:
    """Tail sups of kappa on circles |alpha| = s_k, s_k -> 1.

    The sup over a circle is a lower proxy for the sup over the annulus
    |alpha| > s_k. The reported proxy is the last tail sup; converged means
    the last two tail sups agree to ``conv_tol`` (relative) and every
    quadrature converged.
    """
    schedule = list(schedule) if schedule is not None else default_schedule()
    if any(not 0 < s < 1 for s in schedule) or any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise ValueError("schedule must be strictly increasing in (0, 1)")
    cfg = cfg or SWEEP_CFG
    sups, errs, args = [], [], []
    quad_ok = True
    for s in schedule:
        v, e, ok, th = _circle_sup(psi, s, angles, cfg, golden_iters)
        sups.append(v)
        errs.append(e)
        args.append(th)
        quad_ok = quad_ok and ok
    proxy = sups[-1]
    if len(sups) >= 2:
        gap = abs(sups[-1] - sups[-2])
        settled = gap <= conv_tol * max(abs(sups[-1]), abs(sups[-2])) or max(abs(sups[-1]), abs(sups[-2])) <= 1e-12
    else:
        gap, settled = math.nan, False
    lines = [
        "tail sups are maxima of kappa over the circles |alpha| = s_k "
        f"({angles} angles + {golden_iters} golden-section steps); "
        "each is a lower proxy for the sup over |alpha| > s_k",
        f"last inter-level gap {gap:.3e}; settled={settled}; quadrature converged={quad_ok}",
    ]
    return EssNormEstimate(schedule, sups, errs, proxy, bool(settled and quad_ok), "\n".join(lines), args, quad_ok)


# ---------------------------------------------------------------- Blaschke checks


def _blaschke_zeros(B: Symbol) -> tuple:
    if not isinstance(B, Blaschke):
        raise TypeError("expected a Blaschke product")
    return B.zeros


def blaschke_cov_check(B: Symbol, alpha, cfg: QuadConfig | None = None) -> float:
    """Relative gap in  int |B'|^2 / |1 - conj(a) B|^3 = n * int 1 / |1 - conj(a) z|^3."""
    zeros = _blaschke_zeros(B)
    if abs(complex(eval_jet(B, 0).f)) > 1e-12:
        raise ValueError("blaschke_cov_check requires B(0) = 0")
    alpha = complex(alpha)
    if abs(alpha) >= 1:
        raise ValueError("alpha must lie in the open disk")
    cfg = cfg or QuadConfig(rel_tol=1e-7)
    n = len(zeros)
    w = 1 - abs(alpha) ** 2
    ac = alpha.conjugate()
    jet = fn._JetMemo(B)
    lhs = integrate_disk(
        lambda z: w * np.abs(jet(z).d1) ** 2 / np.abs(1 - ac * jet(z).f) ** 3,
        fn._cfg_for(alpha, cfg),
        fn._peak_indicator(jet, alpha),
    ).value
    rhs = w * series_kernel_integral(alpha, 3)
    return abs(lhs - n * rhs) / (n * rhs)


@dataclass(frozen=True)
class NormBoundReport:
    second_derivative_mass: float
    log_term: float
    factor_second_terms: float
    factor_quotient_terms: float
    holds: bool
    checked: bool


def _mobius_parts(a: complex):
    """|phi_a''| and |phi_a'|^2 / |phi_a| as vectorized callables."""
    k = 1 - abs(a) ** 2
    ac = a.conjugate()

    def second(z):
        return 2 * abs(a) * k / np.abs(1 - ac * z) ** 3

    def quotient(z):
        den = np.abs(1 - ac * z)
        return k * k / (den**3 * np.abs(a - z))

    return second, quotient


def blaschke_norm_bound(B: Symbol, cfg: QuadConfig | None = None) -> tuple[float, NormBoundReport]:
    """||B''||_1 + |B(0)| + |B'(0)| and the pointwise decomposition bound.

    The bound integrates |B'|^2/|B| + sum_j |phi_j''| + sum_j |phi_j'|^2/|phi_j|,
    each piece having integrable 1/|z - a_j| singularities; the factor terms
    are integrated in polar coordinates about their own zero.
    """
    zeros = _blaschke_zeros(B)
    cfg = cfg or QuadConfig(rel_tol=1e-6)
    jet = fn._JetMemo(B)
    mass = integrate_disk(lambda z: np.abs(jet(z).d2), cfg)
    j0 = eval_jet(B, 0)
    m_value = abs(complex(j0.f)) + abs(complex(j0.d1)) + mass.value

    # a zero at the origin is already tamed by the polar Jacobian
    zs = np.array([a for a in zeros if abs(a) > 1e-12], dtype=complex)

    def near_zero(z):
        if zs.size == 0:
            return np.full(z.shape, np.inf)
        return np.min(np.abs(z[..., None] - zs), axis=-1)

    singular_cfg = cfg.with_(singular_refine_threshold=0.5, max_panels=max(cfg.max_panels, 60000))
    log_term = integrate_disk(
        lambda z: np.abs(jet(z).d1) ** 2 / np.maximum(np.abs(jet(z).f), 1e-300), singular_cfg, near_zero
    )
    second_sum, quotient_sum, ok = 0.0, 0.0, log_term.converged and mass.converged
    for a in zeros:
        second, quotient = _mobius_parts(a)
        r2 = integrate_disk(second, cfg)
        rq = integrate_about(quotient, a, cfg)
        second_sum += r2.value
        quotient_sum += rq.value
        ok = ok and r2.converged and rq.converged
    bound = log_term.value + second_sum + quotient_sum
    report = NormBoundReport(mass.value, log_term.value, second_sum, quotient_sum, mass.value <= bound * (1 + 1e-9), ok)
    return m_value, report


def m_norm(f: Symbol, cfg: QuadConfig | None = None) -> float:
    """|f(0)| + |f'(0)| + ||f''||_1.

    This is equivalent (up to absolute constants) to the atomic norm of the
    minimal Mobius-invariant space, not equal to it.
    """
    cfg = cfg or QuadConfig(rel_tol=1e-8)
    j0 = eval_jet(f, 0)
    mass = integrate_disk(lambda z: np.abs(eval_jet(f, z).d2), cfg)
    return abs(complex(j0.f)) + abs(complex(j0.d1)) + mass.value


# ---------------------------------------------------------------- cone lower bounds

DEFAULT_R_GRID = tuple(round(0.05 * k, 2) for k in range(1, 11))


class NormalizationError(ValueError):
    pass


def _radial_limit_at_one(f: Symbol, delta: float = 1e-6) -> complex:
    j = eval_jet(f, 1 - delta)
    return complex(j.f) + delta * complex(j.d1)


def check_normalized(f: Symbol, tol: float = 1e-8) -> None:
    """f(0) = f'(0) = 0 and f(1) = 1, the latter by first-order extrapolation from 1 - 1e-6."""
    j0 = eval_jet(f, 0)
    if abs(complex(j0.f)) > tol or abs(complex(j0.d1)) > tol:
        raise NormalizationError("need f(0) = f'(0) = 0")
    if abs(_radial_limit_at_one(f) - 1) > tol:
        raise NormalizationError("need f(1) = 1")


@dataclass(frozen=True)
class Lemma1Row:
    r: float
    mass: float
    ratio: float
    error: float
    converged: bool


def lemma1_scan(f: Symbol, r_grid=DEFAULT_R_GRID, cfg: QuadConfig | None = None) -> list:
    """Mass of |f''| over Omega_r and mass / r on a grid of r in (0, 1/2]."""
    check_normalized(f)
    rows = []
    for r in r_grid:
        if not 0 < r <= 0.5:
            raise ValueError("r must lie in (0, 1/2]")
        res = fn.omega_mass(f, Region.omega_r(r), cfg)
        rows.append(Lemma1Row(r, res.value, res.value / r, res.error_estimate, res.converged))
    return rows


def lemma1_family() -> dict:
    """Normalized test functions (f(0) = f'(0) = 0, f(1) = 1) for the cone-mass constant."""
    from .symbols import Polynomial

    fam = {
        "z^2": Polynomial((0, 0, 1)),
        "z^3": Polynomial((0, 0, 0, 1)),
        "z^4": Polynomial((0, 0, 0, 0, 1)),
    }
    for label, a in (("z^2*phi_0.5", 0.5), ("z^2*phi_(-0.3+0.4i)", -0.3 + 0.4j)):
        rot = 1 / complex(eval_jet(make_blaschke([a]), 1).f)
        fam[label] = make_blaschke([0, 0, a], rot)
    return fam


def empirical_c0(r_grid=DEFAULT_R_GRID, cfg: QuadConfig | None = None) -> tuple[float, dict]:
    """Min over the documented family and grid of mass(Omega_r) / r."""
    scans = {name: lemma1_scan(f, r_grid, cfg) for name, f in lemma1_family().items()}
    c0 = min(row.ratio for rows in scans.values() for row in rows)
    return c0, scans


@dataclass(frozen=True)
class LowerBoundRow:
    beta: float
    kappa: float
    bound: float
    ratio: float
    skipped: bool = False


def noncompact_lower_bound(psi: Symbol, beta_schedule, cfg: QuadConfig | None = None) -> list:
    """kappa(psi, psi(beta)) next to 1 - (1 - beta)/(1 - beta^2) along beta -> 1.

    ``ratio`` is kappa / bound, the empirical comparability constant.
    """
    cfg = cfg or SWEEP_CFG
    rows = []
    for beta in beta_schedule:
        bound = 1 - (1 - beta) / (1 - beta * beta)
        a = complex(eval_jet(psi, beta).f)
        if abs(a) >= 1:
            rows.append(LowerBoundRow(beta, math.nan, bound, math.nan, True))
            continue
        k = fn.kappa(psi, a, cfg).value
        rows.append(LowerBoundRow(beta, k, bound, k / bound))
    return rows


# ---------------------------------------------------------------- (n; t) values


class TrajectoryError(RuntimeError):
    pass


@dataclass(frozen=True)
class NTStep:
    m: int
    betas: list
    ratios: list


@dataclass(frozen=True)
class NTProfile:
    steps: list
    zetas: list
    n: int
    t: float
    interior_trajectories: int


def nt_profile(B: Symbol, xi=1.0, m_schedule=(10, 100, 1000, 10000)) -> NTProfile:
    """Preimage trajectories of alpha_m = (1 - 1/m) xi and their Stolz ratios.

    Trajectories are continued by nearest neighbour between consecutive m;
    a jump larger than half the minimal inter-root distance is an error.
    Each trajectory is matched to the boundary solution of B(zeta) = xi
    nearest its last point; trajectories ending inside the disk are
    counted separately and excluded from n.
    """
    xi = complex(xi)
    if abs(abs(xi) - 1) > 1e-12:
        raise ValueError("xi must lie on the unit circle")
    ms = sorted(int(m) for m in m_schedule)
    if not ms or ms[0] < 2:
        raise ValueError("m_schedule entries must be >= 2")

    def interior_roots(m):
        rs = preimages(B, (1 - 1 / m) * xi)
        return sorted((r for r in rs if abs(r) < 1), key=lambda w: (round(w.real, 12), round(w.imag, 12)))

    tracks = [[r] for r in interior_roots(ms[0])]
    for m in ms[1:]:
        new = interior_roots(m)
        if len(new) != len(tracks):
            raise TrajectoryError(f"preimage count changed at m={m}")
        if len(new) > 1:
            gaps = [abs(a - b) for i, a in enumerate(new) for b in new[i + 1 :]]
            limit = 0.5 * min(gaps)
        else:
            limit = math.inf
        used = set()
        for tr in tracks:
            dists = [abs(w - tr[-1]) for w in new]
            j = int(np.argmin(dists))
            if j in used or dists[j] > limit:
                raise TrajectoryError(f"ambiguous continuation at m={m}")
            used.add(j)
            tr.append(new[j])

    zetas_all = boundary_preimages(B, xi)
    zetas, boundary_tracks, interior = [], [], 0
    for tr in tracks:
        if zetas_all.size == 0:
            interior += 1
            continue
        d_first = np.abs(zetas_all - tr[0])
        d_last = np.abs(zetas_all - tr[-1])
        j = int(np.argmin(d_last))
        # a trajectory heading to the circle must close most of its gap
        if len(ms) < 2 or d_last[j] > 0.5 * d_first[j]:
            interior += 1
            continue
        zetas.append(complex(zetas_all[j]))
        boundary_tracks.append(tr)
    if len(set((round(z.real, 9), round(z.imag, 9)) for z in zetas)) != len(zetas):
        raise TrajectoryError("two trajectories share a boundary limit")

    steps = []
    for i, m in enumerate(ms):
        betas = [tr[i] for tr in boundary_tracks]
        ratios = [(1 - abs(b)) / abs(z - b) for b, z in zip(betas, zetas)]
        steps.append(NTStep(m, betas, ratios))
    tail = steps[len(steps) // 2 :]
    t = min((min(s.ratios) for s in tail if s.ratios), default=0.0)
    return NTProfile(steps, zetas, len(zetas), t, interior)
