"""Scattering channel sets, channel momenta, and the diagonal angular matrix A(n).

Channel momenta follow k_n = sqrt(k0^2 - 2 E_n) with the branch that keeps
Im k_n >= 0, so closed-channel waves decay.  Powers of complex momenta use the
principal branch with argument in [0, pi).
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from .specfun import AngularIndex, sph_harm

__all__ = ["Channel", "ChannelSet", "Momenta", "compute_momenta", "matrix_A", "kpow"]


@dataclass(frozen=True)
class Channel:
    label: str
    energy: float  # excitation energy, hartree
    angular: AngularIndex
    parity: int  # +1 or -1

    def __post_init__(self):
        if self.energy < 0:
            raise ValueError(f"excitation energy must be >= 0, got {self.energy}")
        if self.parity not in (+1, -1):
            raise ValueError(f"parity must be +1 or -1, got {self.parity}")


@dataclass(frozen=True)
class ChannelSet:
    channels: tuple[Channel, ...]

    def __post_init__(self):
        if len(self.channels) < 1:
            raise ValueError("at least one channel required")
        if self.channels[0].energy != 0.0:
            raise ValueError("entrance channel (index 0) must have E0 = 0")

    def __len__(self) -> int:
        return len(self.channels)

    @property
    def energies(self) -> np.ndarray:
        return np.array([c.energy for c in self.channels])

    @property
    def l(self) -> np.ndarray:
        return np.array([c.angular.l for c in self.channels], dtype=int)

    @property
    def m(self) -> np.ndarray:
        return np.array([c.angular.m for c in self.channels], dtype=int)

    @property
    def parities(self) -> np.ndarray:
        return np.array([c.parity for c in self.channels], dtype=int)


def kpow(k: complex, p: float) -> complex:
    """k**p on the principal branch.

    Physical momenta live in the Im k >= 0 half-plane (argument in [0, pi)),
    where this is the standard analytic power; arguments slightly below the
    real axis (resonance continuation) stay on the same branch.
    """
    if p == 0:
        return 1.0 + 0.0j
    kc = complex(k)
    if kc == 0:
        if p > 0:
            return 0.0j
        raise ZeroDivisionError("0 raised to a negative power")
    return cmath.exp(p * cmath.log(kc))


@dataclass(frozen=True)
class Momenta:
    """Channel momenta at a given entrance momentum k0."""

    k0: float
    k: np.ndarray  # complex, k[0] == k0
    open_channel: np.ndarray  # bool

    def __len__(self) -> int:
        return len(self.k)


def compute_momenta(cs: ChannelSet, k0: float) -> Momenta:
    """Per-channel momenta k_n = sqrt(k0^2 - 2 E_n); closed channels get k_n = i sqrt(2E_n - k0^2)."""
    if not np.isfinite(k0) or k0 <= 0:
        raise ValueError(f"k0 must be positive and finite, got {k0}")
    e = cs.energies
    k = np.empty(len(cs), dtype=complex)
    is_open = np.empty(len(cs), dtype=bool)
    for n, en in enumerate(e):
        q2 = k0 * k0 - 2.0 * en
        if q2 > 0:
            k[n] = np.sqrt(q2)
            is_open[n] = True
        else:
            # threshold (q2 == 0) is classified closed
            k[n] = 1j * np.sqrt(-q2)
            is_open[n] = False
    k[0] = k0
    return Momenta(k0=k0, k=k, open_channel=is_open)


def matrix_A(cs: ChannelSet, direction: np.ndarray) -> np.ndarray:
    """Diagonal matrix A(n) = diag(Y_{l_n m_n}(direction))."""
    return np.diag([sph_harm(c.angular, direction) for c in cs.channels])
