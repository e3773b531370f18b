"""One-center matrix zero-range potential.

The Hermitian strength matrix W fixes the ratio of regular to irregular
Helmholtz solutions at the center.  The channel-space amplitude matrix is
F = -(K^-L W0 K^-L + i K)^-1 with W0 = (-i)^L W i^L, and the full angular
amplitude is F(n, n0) = 4 pi A(n) F A^+(n0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .channels import ChannelSet, Momenta, kpow, matrix_A

__all__ = [
    "PoleError",
    "InteractionW",
    "OneCenterF",
    "AmplitudeField",
    "build_one_center_F",
    "one_channel_gzrp",
    "two_state_inverse_F",
    "reactance_matrix",
    "angular_amplitude",
    "small_r_asymptotics_check",
    "double_factorial",
]

COND_LIMIT = 1e12


class PoleError(Exception):
    """Raised when an amplitude matrix is (near-)singular at the requested energy.

    Carries diagnostic data: the condition estimate and, where known, which
    parity block was singular.  A pole signals a bound or quasistationary state.
    """

    def __init__(self, message: str, cond: float | None = None, branch: str | None = None):
        super().__init__(message)
        self.cond = cond
        self.branch = branch


def double_factorial(n: int) -> int:
    """n!! with the convention (-1)!! = 1."""
    if n < -1:
        raise ValueError("double factorial defined for n >= -1")
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


@dataclass(frozen=True)
class InteractionW:
    """Hermitian channel-coupling matrix W and the diagonal of orbital momenta."""

    w: np.ndarray
    l: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.w, dtype=complex)
        l = np.asarray(self.l, dtype=int)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "l", l)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError("W must be a square matrix")
        if len(l) != w.shape[0]:
            raise ValueError("L diagonal length must match W")
        if np.max(np.abs(w - w.conj().T)) > 1e-13 * max(1.0, np.max(np.abs(w))):
            raise ValueError("W must be Hermitian")

    @property
    def n_channels(self) -> int:
        return self.w.shape[0]

    @property
    def w0(self) -> np.ndarray:
        """W0 = (-i)^L W i^L (also Hermitian)."""
        phase = (-1j) ** self.l
        return phase[:, None] * self.w * phase.conj()[None, :]

    @classmethod
    def from_w0(cls, w0: np.ndarray, l) -> "InteractionW":
        """Build from W0, inverting the phase transformation."""
        w0 = np.asarray(w0, dtype=complex)
        l = np.asarray(l, dtype=int)
        phase = (1j) ** l
        return cls(w=phase[:, None] * w0 * phase.conj()[None, :], l=l)


@dataclass(frozen=True)
class OneCenterF:
    """Channel-space amplitude matrix of a single matrix ZRP."""

    F: np.ndarray
    momenta: Momenta


@dataclass(frozen=True)
class AmplitudeField:
    """Evaluatable matrix amplitude over direction pairs (n, n0)."""

    evaluate: Callable[[np.ndarray, np.ndarray], np.ndarray]

    def __call__(self, n: np.ndarray, n0: np.ndarray) -> np.ndarray:
        return self.evaluate(np.asarray(n, dtype=float), np.asarray(n0, dtype=float))


def _inverse_F_matrix(w: InteractionW, mom: Momenta) -> np.ndarray:
    """-F^-1 = K^-L W0 K^-L + iK, in channel space."""
    k = mom.k
    l = w.l
    kml = np.array([kpow(k[n], -int(l[n])) for n in range(len(k))])
    return kml[:, None] * w.w0 * kml[None, :] + 1j * np.diag(k)


def build_one_center_F(w: InteractionW, mom: Momenta) -> OneCenterF:
    """F = -(K^-L W0 K^-L + iK)^-1; raises PoleError at a singular energy."""
    if w.n_channels != len(mom):
        raise ValueError("W and momenta dimension mismatch")
    m = _inverse_F_matrix(w, mom)
    cond = np.linalg.cond(m)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise PoleError(
            f"one-center inverse amplitude is singular (cond ~ {cond:.3e}); "
            "bound or quasistationary state at this energy",
            cond=cond,
        )
    return OneCenterF(F=-np.linalg.inv(m), momenta=mom)


def one_channel_gzrp(alpha: float, l: int, k: complex) -> complex:
    """One-channel amplitude F = -k^2l / (alpha + i k^(2l+1))."""
    den = alpha + 1j * kpow(k, 2 * l + 1)
    if den == 0:
        raise PoleError("amplitude pole: alpha + i k^(2l+1) = 0")
    return -kpow(k, 2 * l) / den


def two_state_inverse_F(
    alpha0: float, alpha1: float, c: float, l: int, mom: Momenta
) -> np.ndarray:
    """Closed-form inverse amplitude for an s ground state coupled to an l state."""
    if len(mom) != 2:
        raise ValueError("two channels expected")
    k0, k1 = mom.k[0], mom.k[1]
    k1ml = kpow(k1, -l)
    return -np.array(
        [
            [alpha0 + 1j * k0, c * k1ml],
            [c * k1ml, alpha1 * k1ml * k1ml + 1j * k1],
        ],
        dtype=complex,
    )


def reactance_matrix(w: InteractionW, mom: Momenta) -> np.ndarray:
    """Reactance (K-) matrix -K^(L+1/2) W0^-1 K^(L+1/2); open channels only.

    Hermitian for real momenta; its Cayley transform (E + iK_R)(E - iK_R)^-1
    equals the S-matrix E + 2i K^(1/2) F K^(1/2) built from the amplitude.
    """
    if not np.all(mom.open_channel):
        raise ValueError("reactance matrix requires all channels open")
    try:
        winv = np.linalg.inv(w.w0)
    except np.linalg.LinAlgError as exc:
        raise ValueError("W is singular") from exc
    kh = np.array(
        [kpow(mom.k[n], int(w.l[n]) + 0.5) for n in range(len(mom))]
    )
    return -kh[:, None] * winv * kh[None, :]


def angular_amplitude(f: OneCenterF, cs: ChannelSet) -> AmplitudeField:
    """Angular amplitude field F(n, n0) = 4 pi A(n) F A^+(n0)."""
    if len(cs) != f.F.shape[0]:
        raise ValueError("channel set and F dimension mismatch")

    def evaluate(n: np.ndarray, n0: np.ndarray) -> np.ndarray:
        a = np.diag(matrix_A(cs, n))
        a0 = np.diag(matrix_A(cs, n0)).conj()
        return 4.0 * math.pi * a[:, None] * f.F * a0[None, :]

    return AmplitudeField(evaluate=evaluate)


def _fd_weights(points: np.ndarray, x0: float, order: int) -> np.ndarray:
    # Solve sum_i w_i (x_i - x0)^k / k! = delta_{k,order}, k = 0..len(points)-1.
    n = len(points)
    a = np.empty((n, n))
    dx = points - x0
    a[0] = 1.0
    for k in range(1, n):
        a[k] = a[k - 1] * dx / k
    rhs = np.zeros(n)
    rhs[order] = 1.0
    return np.linalg.solve(a, rhs)


def small_r_asymptotics_check(w: InteractionW, r: float) -> float:
    """Residual of the small-r boundary condition applied to the asymptotic solution.

    Builds the radial matrix solution (2L-E)!! r^(-L-E) - r^L W / (2L+E)!!,
    applies the derivative boundary operator by finite differences at radius r,
    and returns the norm of the mismatch against the W-coupled right-hand side.
    Converges to zero as r -> 0 (linearly for s channels); exactly zero for W = 0.
    """
    if r <= 0:
        raise ValueError("r must be positive")
    if r > 0.5:
        import warnings

        warnings.warn("r is large for the asymptotic regime; residual may be meaningless")
    nch = w.n_channels
    l = w.l
    wmat = w.w

    def y_row(n: int, rho: float) -> np.ndarray:
        ln = int(l[n])
        row = -(rho ** ln) * wmat[n] / double_factorial(2 * ln + 1)
        row = np.array(row, dtype=complex)
        row[n] += double_factorial(2 * ln - 1) * rho ** (-ln - 1)
        return row

    def bracket(rho: float) -> np.ndarray:
        # rows scaled so the irregular part approaches the identity at rho -> 0
        b = np.empty((nch, nch), dtype=complex)
        for p in range(nch):
            lp = int(l[p])
            b[p] = rho ** (lp + 1) * y_row(p, rho) / double_factorial(2 * lp - 1)
        return b

    resid = 0.0
    rhs_full = np.empty((nch, nch), dtype=complex)
    lhs_full = np.empty((nch, nch), dtype=complex)
    br = bracket(r)
    for n in range(nch):
        ln = int(l[n])
        order = 2 * ln + 1
        npts = order + 2
        h = r / (npts + 1)
        pts = r + h * (np.arange(npts) - (npts - 1) / 2.0)
        wts = _fd_weights(pts, r, order)
        g = np.array([pts[i] ** (ln + 1) * y_row(n, pts[i]) for i in range(npts)])
        lhs_full[n] = wts @ g
        rhs_full[n] = -(2 ** ln) * math.factorial(ln) * (wmat[n] @ br)
    resid = float(np.max(np.abs(lhs_full - rhs_full)))
    return resid
