"""Special functions and angular-momentum algebra.

Spherical Bessel functions, the outgoing Hankel-type function h_lam used by
the inter-center propagator, Legendre polynomials, spherical harmonics with
Condon-Shortley phase, Wigner 3-j symbols evaluated in exact rational
arithmetic, Gaunt-type integrals of |Y_lm|^2 P_lam, and Gauss quadrature
rules.  Everything here is a pure function; tables are immutable.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from numpy.polynomial.hermite import hermgauss
from numpy.polynomial.legendre import leggauss
from scipy.special import spherical_jn

LMAX = 60
JMAX = 40

__all__ = [
    "LMAX",
    "JMAX",
    "QuadratureRule",
    "AngularIndex",
    "spherical_bessel_j",
    "hankel_outgoing_h",
    "legendre_p",
    "legendre_p_all",
    "sph_harm",
    "sph_harm_angles",
    "sph_harm_vec",
    "wigner3j",
    "gaunt_yyP",
    "gaunt3",
]


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights of a Gauss rule ('gauss-legendre' or 'gauss-hermite')."""

    nodes: np.ndarray
    weights: np.ndarray
    kind: str

    @classmethod
    def gauss_legendre(cls, n: int) -> "QuadratureRule":
        x, w = leggauss(n)
        return cls(nodes=x, weights=w, kind="gauss-legendre")

    @classmethod
    def gauss_hermite(cls, n: int) -> "QuadratureRule":
        x, w = hermgauss(n)
        return cls(nodes=x, weights=w, kind="gauss-hermite")

    def integrate(self, f) -> float | complex:
        return np.sum(self.weights * f(self.nodes))


@dataclass(frozen=True)
class AngularIndex:
    """Orbital momentum quantum numbers (l, m) of one channel."""

    l: int
    m: int

    def __post_init__(self):
        if self.l < 0:
            raise ValueError(f"l must be non-negative, got {self.l}")
        if abs(self.m) > self.l:
            raise ValueError(f"|m| <= l required, got l={self.l}, m={self.m}")


def spherical_bessel_j(lam: int, x: float) -> float:
    """Regular spherical Bessel j_lam(x) for real x >= 0."""
    if lam < 0 or lam > LMAX:
        raise ValueError(f"lambda must be in [0, {LMAX}], got {lam}")
    if not np.isfinite(x):
        raise ValueError("x must be finite")
    if x < 0:
        raise ValueError(f"x must be >= 0, got {x}")
    return float(spherical_jn(lam, x))


def hankel_outgoing_h(lam: int, x: complex) -> complex:
    """Outgoing Hankel-type function h_lam(x) = x^lam (-(1/x) d/dx)^lam (e^{ix}/x).

    Equals i * h_lam^(1)(x) in the standard spherical Hankel convention.
    Evaluated from the exact terminating series; valid for complex x != 0
    (real arguments must be positive).
    """
    if lam < 0 or lam > LMAX:
        raise ValueError(f"lambda must be in [0, {LMAX}], got {lam}")
    z = complex(x)
    if z == 0:
        raise ValueError("hankel_outgoing_h is singular at x = 0")
    if z.imag == 0 and z.real <= 0:
        raise ValueError(f"real argument must be positive, got {z.real}")
    # h = (-i)^lam (e^{iz}/z) sum_m c_m (i/(2z))^m, c_m = (lam+m)!/(m!(lam-m)!)
    term = 1.0 + 0.0j
    acc = term
    ratio_base = 1j / (2.0 * z)
    for m in range(1, lam + 1):
        term = term * ratio_base * ((lam + m) * (lam - m + 1) / m)
        acc += term
    return (-1j) ** lam * cmath.exp(1j * z) / z * acc


def legendre_p(lam: int, x: float) -> float:
    """Legendre polynomial P_lam(x) on [-1, 1] by three-term recurrence."""
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    if abs(x) > 1.0:
        raise ValueError(f"|x| <= 1 required, got {x}")
    if lam == 0:
        return 1.0
    pm1, p = 1.0, x
    for n in range(1, lam):
        pm1, p = p, ((2 * n + 1) * x * p - n * pm1) / (n + 1)
    return p


def legendre_p_all(lmax: int, x: np.ndarray) -> np.ndarray:
    """P_0..P_lmax at (array) x, shape (lmax+1,) + x.shape."""
    x = np.asarray(x, dtype=float)
    out = np.empty((lmax + 1,) + x.shape)
    out[0] = 1.0
    if lmax >= 1:
        out[1] = x
    for n in range(1, lmax):
        out[n + 1] = ((2 * n + 1) * x * out[n] - n * out[n - 1]) / (n + 1)
    return out


def _norm_assoc_legendre(l: int, m: int, x: float) -> float:
    # Fully normalized P~_lm with Condon-Shortley phase:
    # Y_lm = P~_lm(cos theta) e^{i m phi}, m >= 0.  Stable upward recurrence.
    s = math.sqrt(max(0.0, 1.0 - x * x))
    pmm = math.sqrt(1.0 / (4.0 * math.pi))
    for k in range(m):
        pmm *= -math.sqrt((2 * k + 3) / (2.0 * (k + 1))) * s
    if l == m:
        return pmm
    pmmp1 = x * math.sqrt(2 * m + 3.0) * pmm
    if l == m + 1:
        return pmmp1
    for ll in range(m + 2, l + 1):
        a = math.sqrt((4.0 * ll * ll - 1.0) / (ll * ll - m * m))
        b = math.sqrt(((ll - 1.0) ** 2 - m * m) / (4.0 * (ll - 1.0) ** 2 - 1.0))
        pmm, pmmp1 = pmmp1, a * (x * pmmp1 - b * pmm)
    return pmmp1


def sph_harm_angles(l: int, m: int, theta: float, phi: float) -> complex:
    """Y_lm(theta, phi) with Condon-Shortley phase."""
    if l < 0 or l > LMAX:
        raise ValueError(f"l must be in [0, {LMAX}]")
    if abs(m) > l:
        raise ValueError("|m| <= l required")
    ma = abs(m)
    p = _norm_assoc_legendre(l, ma, math.cos(theta))
    y = p * cmath.exp(1j * ma * phi)
    if m < 0:
        y = (-1) ** ma * y.conjugate()
    return y


def sph_harm(idx: AngularIndex, direction: np.ndarray) -> complex:
    """Y_lm evaluated at a unit 3-vector."""
    v = np.asarray(direction, dtype=float)
    norm = np.linalg.norm(v)
    if abs(norm - 1.0) > 1e-12:
        raise ValueError(f"direction must be a unit vector, |v| = {norm}")
    theta = math.acos(min(1.0, max(-1.0, v[2] / norm)))
    phi = math.atan2(v[1], v[0])
    return sph_harm_angles(idx.l, idx.m, theta, phi)


def sph_harm_vec(idx: AngularIndex, v: np.ndarray) -> complex:
    """Y_lm of the direction of v; the zero vector maps to delta_l0 delta_m0 / sqrt(4 pi)."""
    v = np.asarray(v, dtype=float)
    norm = np.linalg.norm(v)
    if norm == 0.0:
        if idx.l == 0 and idx.m == 0:
            return complex(1.0 / math.sqrt(4.0 * math.pi))
        return 0.0j
    return sph_harm(idx, v / norm)


@lru_cache(maxsize=None)
def wigner3j(j1: int, j2: int, j3: int, m1: int, m2: int, m3: int) -> float:
    """Wigner 3-j symbol for integer arguments, via the Racah sum in exact rationals.

    Returns 0.0 when the triangle or projection selection rules fail.
    """
    for j in (j1, j2, j3):
        if j < 0 or j > JMAX:
            raise ValueError(f"j must be in [0, {JMAX}], got {j}")
    if m1 + m2 + m3 != 0:
        return 0.0
    if j3 < abs(j1 - j2) or j3 > j1 + j2:
        return 0.0
    if abs(m1) > j1 or abs(m2) > j2 or abs(m3) > j3:
        return 0.0

    f = math.factorial
    tmin = max(0, j2 - j3 - m1, j1 - j3 + m2)
    tmax = min(j1 + j2 - j3, j1 - m1, j2 + m2)
    total = Fraction(0)
    for t in range(tmin, tmax + 1):
        den = (
            f(t)
            * f(j3 - j2 + t + m1)
            * f(j3 - j1 + t - m2)
            * f(j1 + j2 - j3 - t)
            * f(j1 - t - m1)
            * f(j2 - t + m2)
        )
        total += Fraction((-1) ** t, den)
    if total == 0:
        return 0.0
    delta = Fraction(
        f(j1 + j2 - j3) * f(j1 - j2 + j3) * f(-j1 + j2 + j3), f(j1 + j2 + j3 + 1)
    )
    prod = Fraction(
        f(j1 + m1) * f(j1 - m1) * f(j2 + m2) * f(j2 - m2) * f(j3 + m3) * f(j3 - m3)
    )
    # |3j|^2 as an exact rational keeps every factor in range for conversion.
    mag2 = total * total * delta * prod
    sign = 1.0 if total > 0 else -1.0
    sign *= (-1) ** (j1 - j2 - m3)
    return sign * math.sqrt(float(mag2))


@lru_cache(maxsize=None)
def gaunt_yyP(l: int, m: int, lam: int) -> float:
    """Angular integral of |Y_lm(n)|^2 P_lam(n . e_z) over the sphere.

    Vanishes for odd lam by symmetry; nonzero only for even lam <= 2l.
    """
    if abs(m) > l:
        raise ValueError("|m| <= l required")
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    if lam % 2 == 1:
        return 0.0
    if lam > 2 * l:
        return 0.0
    return (
        (-1) ** m
        * (2 * l + 1)
        * wigner3j(l, l, lam, 0, 0, 0)
        * wigner3j(l, l, lam, -m, m, 0)
    )


@lru_cache(maxsize=None)
def gaunt3(l1: int, m1: int, l2: int, m2: int, l3: int, m3: int) -> float:
    """Integral of Y_l1m1 Y_l2m2 Y_l3m3 over the sphere."""
    return math.sqrt(
        (2 * l1 + 1) * (2 * l2 + 1) * (2 * l3 + 1) / (4.0 * math.pi)
    ) * wigner3j(l1, l2, l3, 0, 0, 0) * wigner3j(l1, l2, l3, m1, m2, m3)
