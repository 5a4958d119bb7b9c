"""Analytic self-maps of the unit disk as small expression trees.

Every node evaluates its value, first and second derivative exactly
(structural differentiation), on scalars or numpy arrays of points.
Rational nodes can be flattened to a numerator/denominator pair, which
is what the valency counter uses.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Union

import numpy as np

UNIMODULAR_TOL = 1e-12
POLE_TOL = 1e-14


class SymbolError(ValueError):
    """Invalid symbol construction."""


class EvaluationError(ArithmeticError):
    """A denominator came within POLE_TOL of zero."""


class UnsupportedSymbolError(TypeError):
    """The symbol is not reducible to a rational function."""


def _finite_complex(value, name: str) -> complex:
    try:
        c = complex(value)
    except (TypeError, ValueError) as exc:
        raise SymbolError(f"{name} is not a complex number: {value!r}") from exc
    if not (math.isfinite(c.real) and math.isfinite(c.imag)):
        raise SymbolError(f"{name} must be finite, got {c!r}")
    return c


@dataclass(frozen=True)
class Mobius:
    alpha: complex

    def __post_init__(self):
        a = _finite_complex(self.alpha, "alpha")
        if abs(a) > 1 + UNIMODULAR_TOL:
            raise SymbolError(f"Mobius parameter must satisfy |alpha| <= 1, got {abs(a)!r}")
        object.__setattr__(self, "alpha", a)


@dataclass(frozen=True)
class Blaschke:
    zeros: tuple
    rotation: complex = 1 + 0j

    def __post_init__(self):
        zs = tuple(_finite_complex(a, "zero") for a in self.zeros)
        for a in zs:
            if abs(a) >= 1:
                raise SymbolError(f"Blaschke zero {a!r} is not inside the unit disk")
        rot = _finite_complex(self.rotation, "rotation")
        if abs(abs(rot) - 1) > UNIMODULAR_TOL:
            raise SymbolError(f"rotation must be unimodular, got |rotation|={abs(rot)!r}")
        object.__setattr__(self, "zeros", zs)
        object.__setattr__(self, "rotation", rot)

    @property
    def degree(self) -> int:
        return len(self.zeros)


@dataclass(frozen=True)
class Polynomial:
    """Coefficients in ascending order: coeffs[k] multiplies z**k."""

    coeffs: tuple

    def __post_init__(self):
        cs = tuple(_finite_complex(c, "coefficient") for c in self.coeffs)
        if not cs:
            raise SymbolError("polynomial needs at least one coefficient")
        object.__setattr__(self, "coeffs", cs)


@dataclass(frozen=True)
class Compose:
    outer: "Symbol"
    inner: "Symbol"


@dataclass(frozen=True)
class Product:
    left: "Symbol"
    right: "Symbol"


@dataclass(frozen=True)
class Constant:
    c: complex

    def __post_init__(self):
        object.__setattr__(self, "c", _finite_complex(self.c, "constant"))


@dataclass(frozen=True)
class Identity:
    pass


Symbol = Union[Mobius, Blaschke, Polynomial, Compose, Product, Constant, Identity]


class Jet2(NamedTuple):
    """Value, first and second derivative at a point (or array of points)."""

    f: complex
    d1: complex
    d2: complex


def make_mobius(alpha) -> Mobius:
    """The disk automorphism z -> (alpha - z) / (1 - conj(alpha) z)."""
    return Mobius(alpha)


def make_blaschke(zeros, rotation=1.0) -> Blaschke:
    """rotation * prod_j phi_{a_j}(z); zeros are repeated for multiplicity."""
    return Blaschke(tuple(zeros), rotation)


def _mul(a: Jet2, b: Jet2) -> Jet2:
    return Jet2(a.f * b.f, a.d1 * b.f + a.f * b.d1, a.d2 * b.f + 2 * a.d1 * b.d1 + a.f * b.d2)


def _mobius_jet(alpha: complex, z) -> Jet2:
    ac = alpha.conjugate()
    den = 1 - ac * z
    if np.any(np.abs(den) <= POLE_TOL):
        raise EvaluationError(f"Mobius denominator vanishes (alpha={alpha!r})")
    k = abs(alpha) ** 2 - 1
    inv = 1 / den
    return Jet2((alpha - z) * inv, k * inv * inv, 2 * ac * k * inv * inv * inv)


def eval_jet(sym: Symbol, z) -> Jet2:
    """Exact (value, derivative, second derivative) of ``sym`` at ``z``.

    ``z`` may be a complex scalar or a numpy array; the result has the same
    shape in each component.
    """
    if isinstance(z, np.ndarray):
        z = z.astype(complex, copy=False)
    else:
        z = complex(z)
    return _jet(sym, z)


def _jet(sym, z) -> Jet2:
    if isinstance(sym, Identity):
        return Jet2(z, np.ones_like(z) if isinstance(z, np.ndarray) else 1 + 0j, 0 * z)
    if isinstance(sym, Constant):
        zero = 0 * z
        return Jet2(zero + sym.c, zero, zero)
    if isinstance(sym, Mobius):
        return _mobius_jet(sym.alpha, z)
    if isinstance(sym, Blaschke):
        one = 0 * z + 1
        acc = Jet2(sym.rotation * one, 0 * z, 0 * z)
        for a in sym.zeros:
            acc = _mul(acc, _mobius_jet(a, z))
        return acc
    if isinstance(sym, Polynomial):
        p = 0 * z + 0j
        d1 = 0 * z + 0j
        d2 = 0 * z + 0j
        for c in reversed(sym.coeffs):
            d2 = d2 * z + 2 * d1
            d1 = d1 * z + p
            p = p * z + c
        return Jet2(p, d1, d2)
    if isinstance(sym, Product):
        return _mul(_jet(sym.left, z), _jet(sym.right, z))
    if isinstance(sym, Compose):
        g = _jet(sym.inner, z)
        f = _jet(sym.outer, g.f)
        return Jet2(f.f, f.d1 * g.d1, f.d2 * g.d1 * g.d1 + f.d1 * g.d2)
    raise TypeError(f"not a symbol: {sym!r}")


def evaluate(sym: Symbol, z):
    return eval_jet(sym, z).f


def comp_second_derivative(alpha, psi: Symbol, z):
    """Second derivative of phi_alpha o psi at z."""
    alpha = complex(alpha)
    if abs(alpha) >= 1:
        raise ValueError("alpha must lie in the open disk")
    j = eval_jet(psi, z)
    ac = alpha.conjugate()
    den = 1 - ac * j.f
    if np.any(np.abs(den) <= POLE_TOL):
        raise EvaluationError("1 - conj(alpha) psi(z) vanishes")
    inv = 1 / den
    return (abs(alpha) ** 2 - 1) * inv * inv * (j.d2 + 2 * ac * j.d1 * j.d1 * inv)


# ---------------------------------------------------------------- validation


@dataclass(frozen=True)
class ValidationReport:
    max_modulus: float
    accepted: bool
    boundary_touching: bool
    samples: int
    radius: float


def validate_self_map(sym: Symbol, samples: int = 1024, tol: float = 1e-6) -> ValidationReport:
    """Sample |psi| near the unit circle (maximum principle).

    Values at radius 1 - 1e-6 are pushed to the circle with one Taylor
    step, psi(zeta) ~ psi(r zeta) + (1 - r) zeta psi'(r zeta). The map is
    accepted when the sampled max is <= 1 + tol and flagged boundary-touching
    when the max lies within tol of 1.
    """
    if samples < 64:
        raise ValueError("validate_self_map needs at least 64 samples")
    radius = 1 - 1e-6
    theta = 2 * np.pi * np.arange(samples) / samples
    zeta = np.exp(1j * theta)
    try:
        j = eval_jet(sym, radius * zeta)
        vals = np.abs(j.f + (1 - radius) * zeta * j.d1)
        m = float(np.max(vals))
    except EvaluationError:
        m = math.inf
    if not math.isfinite(m):
        return ValidationReport(math.inf, False, False, samples, radius)
    return ValidationReport(
        max_modulus=m,
        accepted=m <= 1 + tol,
        boundary_touching=abs(m - 1) <= tol,
        samples=samples,
        radius=radius,
    )


# ---------------------------------------------------------------- rational form


def _padd(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = max(len(a), len(b))
    out = np.zeros(n, dtype=complex)
    out[: len(a)] += a
    out[: len(b)] += b
    return out


def _pmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.convolve(a, b)


def _ppow(a: np.ndarray, k: int) -> np.ndarray:
    out = np.array([1 + 0j])
    for _ in range(k):
        out = _pmul(out, a)
    return out


def rational_form(sym: Symbol) -> tuple[np.ndarray, np.ndarray]:
    """Ascending coefficient arrays (p, q) with sym = p / q."""
    one = np.array([1 + 0j])
    if isinstance(sym, Identity):
        return np.array([0j, 1 + 0j]), one
    if isinstance(sym, Constant):
        return np.array([sym.c]), one
    if isinstance(sym, Mobius):
        a = sym.alpha
        return np.array([a, -1 + 0j]), np.array([1 + 0j, -a.conjugate()])
    if isinstance(sym, Blaschke):
        p, q = np.array([sym.rotation]), one
        for a in sym.zeros:
            p = _pmul(p, np.array([a, -1 + 0j]))
            q = _pmul(q, np.array([1 + 0j, -a.conjugate()]))
        return p, q
    if isinstance(sym, Polynomial):
        return np.array(sym.coeffs, dtype=complex), one
    if isinstance(sym, Product):
        p1, q1 = rational_form(sym.left)
        p2, q2 = rational_form(sym.right)
        return _pmul(p1, p2), _pmul(q1, q2)
    if isinstance(sym, Compose):
        p1, q1 = rational_form(sym.outer)
        p2, q2 = rational_form(sym.inner)
        d = max(len(p1), len(q1)) - 1
        pw = [_ppow(p2, k) for k in range(d + 1)]
        qw = [_ppow(q2, d - k) for k in range(d + 1)]
        P = np.zeros(1, dtype=complex)
        Q = np.zeros(1, dtype=complex)
        for k in range(d + 1):
            basis = _pmul(pw[k], qw[k])
            if k < len(p1):
                P = _padd(P, p1[k] * basis)
            if k < len(q1):
                Q = _padd(Q, q1[k] * basis)
        return P, Q
    raise UnsupportedSymbolError(f"symbol {type(sym).__name__} has no rational form")


def _trim(c: np.ndarray, rel: float = 1e-14) -> np.ndarray:
    scale = np.max(np.abs(c)) if len(c) else 0.0
    n = len(c)
    while n > 1 and abs(c[n - 1]) <= rel * scale:
        n -= 1
    return c[:n]


def companion_roots(coeffs: np.ndarray) -> np.ndarray:
    """Roots of an ascending-coefficient polynomial via companion eigenvalues."""
    c = _trim(np.asarray(coeffs, dtype=complex))
    deg = len(c) - 1
    if deg < 1:
        return np.zeros(0, dtype=complex)
    monic = c[:-1] / c[-1]
    comp = np.zeros((deg, deg), dtype=complex)
    comp[1:, :-1] = np.eye(deg - 1)
    comp[:, -1] = -monic
    return np.linalg.eigvals(comp)


def _batched_companion_roots(coeffs: np.ndarray) -> np.ndarray:
    """coeffs: (N, deg+1) ascending, common degree with nonzero leading term."""
    n, m = coeffs.shape
    deg = m - 1
    comp = np.zeros((n, deg, deg), dtype=complex)
    if deg > 1:
        comp[:, 1:, :-1] = np.eye(deg - 1)
    comp[:, :, -1] = -coeffs[:, :-1] / coeffs[:, -1:]
    return np.linalg.eigvals(comp)


@dataclass(frozen=True)
class ValencyReport:
    count: int
    roots: list = field(default_factory=list)
    clustered_multiplicity: list = field(default_factory=list)
    boundary_margin: float = 1e-10
    flagged: list = field(default_factory=list)


def _cluster(roots: np.ndarray, tol: float) -> list[tuple[complex, int]]:
    clusters: list[list[complex]] = []
    for r in sorted(roots, key=lambda w: (round(w.real, 12), round(w.imag, 12))):
        for cl in clusters:
            if abs(cl[0] - r) <= tol:
                cl.append(r)
                break
        else:
            clusters.append([r])
    return [(complex(np.mean(cl)), len(cl)) for cl in clusters]


def preimages(sym: Symbol, z) -> np.ndarray:
    """All finite solutions w of sym(w) = z (any modulus), verified by evaluation."""
    p, q = rational_form(sym)
    coeffs = _padd(p, -complex(z) * q)
    roots = companion_roots(coeffs)
    if len(roots) == 0:
        return roots
    ok = []
    for w in roots:
        try:
            v = complex(evaluate(sym, complex(w)))
        except EvaluationError:
            continue
        if abs(v - z) <= 1e-7 * max(1.0, abs(z)):
            ok.append(w)
    return np.array(ok, dtype=complex)


def valency(sym: Symbol, z, cluster_tol: float | None = None, boundary_margin: float = 1e-10) -> ValencyReport:
    """Number of distinct preimages of z inside the disk.

    ``cluster_tol`` defaults to 1e-8 times the largest root modulus.
    Roots within ``boundary_margin`` of the unit circle are reported in
    ``flagged`` and not counted.
    """
    z = complex(z)
    if abs(z) >= 1:
        raise ValueError("valency is defined for interior points")
    roots = preimages(sym, z)
    if len(roots) == 0:
        return ValencyReport(0, [], [], boundary_margin, [])
    tol = cluster_tol if cluster_tol is not None else 1e-8 * max(float(np.max(np.abs(roots))), 1e-300)
    inside, mult, flagged = [], [], []
    for w, m in _cluster(roots, tol):
        if abs(w) < 1 - boundary_margin:
            inside.append(w)
            mult.append(m)
        elif abs(w) <= 1 + boundary_margin:
            flagged.append(w)
    return ValencyReport(len(inside), inside, mult, boundary_margin, flagged)


def valency_counts(sym: Symbol, zs: np.ndarray, boundary_margin: float = 1e-10) -> np.ndarray:
    """Vectorized distinct-preimage counts at many interior points.

    Used for n_psi on quadrature nodes. Roots that fail the evaluation
    check (cancelled common factors of p and q) are discarded.
    """
    zs = np.asarray(zs, dtype=complex).ravel()
    p, q = rational_form(sym)
    deg = max(len(_trim(p)), len(_trim(q))) - 1
    out = np.zeros(zs.shape, dtype=int)
    if deg < 1 or zs.size == 0:
        return out
    P = np.zeros(deg + 1, dtype=complex)
    Q = np.zeros(deg + 1, dtype=complex)
    P[: min(len(p), deg + 1)] = p[: deg + 1]
    Q[: min(len(q), deg + 1)] = q[: deg + 1]
    coeffs = P[None, :] - zs[:, None] * Q[None, :]
    lead = np.abs(coeffs[:, -1])
    scale = np.max(np.abs(coeffs), axis=1)
    regular = lead > 1e-12 * scale
    idx = np.nonzero(regular)[0]
    if idx.size:
        roots = _batched_companion_roots(coeffs[idx])
        vals = evaluate(sym, np.where(np.abs(roots) < 1, roots, 0))
        good = (np.abs(roots) < 1 - boundary_margin) & (np.abs(vals - zs[idx, None]) <= 1e-7)
        for row, i in enumerate(idx):
            rs = roots[row][good[row]]
            if rs.size <= 1:
                out[i] = rs.size
            else:
                tol = 1e-8 * max(float(np.max(np.abs(roots[row]))), 1e-300)
                out[i] = len(_cluster(rs, tol))
    for i in np.nonzero(~regular)[0]:
        out[i] = valency(sym, zs[i], boundary_margin=boundary_margin).count
    return out


# ---------------------------------------------------------------- helpers


def degree(sym: Symbol) -> int:
    p, q = rational_form(sym)
    return max(len(_trim(p)), len(_trim(q))) - 1


def boundary_preimages(sym: Symbol, xi: complex, tol: float = 1e-8) -> np.ndarray:
    """Solutions of sym(zeta) = xi lying on the unit circle."""
    roots = preimages(sym, xi)
    on = roots[np.abs(np.abs(roots) - 1) <= tol]
    return on / np.abs(on) if on.size else on


def unit(theta: float) -> complex:
    return cmath.exp(1j * theta)
