"""N-center solver for nonoverlapping matrix ZRPs.

Each center carries its own strength matrix; all centers share one channel
set.  The one-center amplitudes are separable in the A(n) basis, which turns
the coupled integral equations into a dense block-linear system: diagonal
blocks F_i^-1, off-diagonal blocks -H_ij built from the inter-center
propagator expansion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .channels import ChannelSet, Momenta, matrix_A
from .twocenter import build_H_matrix
from .zrp_core import AmplitudeField, InteractionW, PoleError, _inverse_F_matrix

__all__ = [
    "CenterSpec",
    "MultiCenterSystem",
    "assemble_system",
    "solve_multicenter",
    "multicenter_amplitude",
    "parity_partner",
    "multicenter_field",
]

COND_LIMIT = 1e12


@dataclass(frozen=True)
class CenterSpec:
    """One scattering center: position, interaction radius, channels, strength matrix."""

    position: np.ndarray
    radius: float
    channels: ChannelSet
    interaction: InteractionW

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))
        if self.radius < 0:
            raise ValueError("radius must be >= 0")


def parity_partner(w: InteractionW, cs: ChannelSet) -> InteractionW:
    """Strength matrix of the inversion image of a center: W -> D W D, D = Sigma (-1)^L."""
    d = cs.parities * (-1) ** cs.l
    return InteractionW(w=d[:, None] * w.w * d[None, :], l=w.l)


@dataclass(frozen=True)
class MultiCenterSystem:
    """Assembled block system M C = rhs for the per-center coefficient matrices."""

    centers: tuple[CenterSpec, ...]
    momenta: Momenta
    matrix: np.ndarray  # (N * N_ch) square
    rhs: np.ndarray  # (N * N_ch, N_ch), for the assembly direction n0
    n0: np.ndarray


def _check_nonoverlap(centers) -> None:
    for i in range(len(centers)):
        for j in range(i + 1, len(centers)):
            sep = np.linalg.norm(centers[i].position - centers[j].position)
            if centers[i].radius + centers[j].radius > sep:
                raise ValueError(
                    f"centers {i} and {j} overlap: d_i + d_j = "
                    f"{centers[i].radius + centers[j].radius} > |R_i - R_j| = {sep}"
                )


def _block_matrix(centers, mom: Momenta) -> np.ndarray:
    nc = len(centers)
    nch = len(mom)
    big = np.zeros((nc * nch, nc * nch), dtype=complex)
    for i, ci in enumerate(centers):
        finv = -_inverse_F_matrix(ci.interaction, mom)
        cond = np.linalg.cond(finv)
        if not np.isfinite(cond) or cond > COND_LIMIT:
            raise PoleError(
                f"diagonal block of center {i} singular (cond ~ {cond:.3e})", cond=cond
            )
        big[i * nch : (i + 1) * nch, i * nch : (i + 1) * nch] = finv
        for j, cj in enumerate(centers):
            if j == i:
                continue
            h = build_H_matrix(ci.channels, mom, ci.position - cj.position)
            big[i * nch : (i + 1) * nch, j * nch : (j + 1) * nch] = -h
    return big


def _rhs_for(centers, mom: Momenta, n0: np.ndarray) -> np.ndarray:
    nch = len(mom)
    s4pi = math.sqrt(4.0 * math.pi)
    rows = []
    for ci in centers:
        a0 = np.diag(matrix_A(ci.channels, n0)).conj()
        phase = np.exp(1j * mom.k * float(np.dot(n0, ci.position)))
        rows.append(s4pi * np.diag(a0 * phase))
    return np.vstack(rows)


def assemble_system(centers, mom: Momenta, n0: np.ndarray) -> MultiCenterSystem:
    """Block system for the C_i matrices with the incident direction n0."""
    centers = tuple(centers)
    if len(centers) < 1:
        raise ValueError("at least one center required")
    base = centers[0].channels
    for c in centers[1:]:
        if c.channels != base:
            raise ValueError("all centers must share one channel set")
    _check_nonoverlap(centers)
    n0 = np.asarray(n0, dtype=float)
    return MultiCenterSystem(
        centers=centers,
        momenta=mom,
        matrix=_block_matrix(centers, mom),
        rhs=_rhs_for(centers, mom, n0),
        n0=n0,
    )


def solve_multicenter(sys: MultiCenterSystem) -> list[np.ndarray]:
    """Solve for the per-center coefficient blocks C_i."""
    cond = np.linalg.cond(sys.matrix)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise PoleError(
            f"multi-center system singular (cond ~ {cond:.3e}): "
            "bound or quasibound state at this energy",
            cond=cond,
        )
    sol = np.linalg.solve(sys.matrix, sys.rhs)
    resid = np.max(np.abs(sys.matrix @ sol - sys.rhs))
    scale = max(np.max(np.abs(sys.rhs)), 1e-300)
    if resid > 1e-11 * scale * max(1.0, cond / 1e4):
        raise RuntimeError(f"solver residual too large: {resid:.3e}")
    nch = len(sys.momenta)
    return [sol[i * nch : (i + 1) * nch] for i in range(len(sys.centers))]


def multicenter_amplitude(centers, c_blocks, mom: Momenta) -> AmplitudeField:
    """Amplitude field F(n, n0) = sum_i e^{-i K n . R_i} C_i(n, n0).

    The returned field is valid for the incident direction the blocks were
    solved for; evaluation at other n0 re-solves internally (see
    multicenter_field for the general-purpose entry point).
    """
    centers = tuple(centers)
    s4pi = math.sqrt(4.0 * math.pi)

    def evaluate(n: np.ndarray, n0: np.ndarray) -> np.ndarray:
        out = np.zeros((len(mom), len(mom)), dtype=complex)
        for ci, c in zip(centers, c_blocks):
            a = np.diag(matrix_A(ci.channels, n))
            phase = np.exp(-1j * mom.k * float(np.dot(n, ci.position)))
            out += (a * phase)[:, None] * c
        return s4pi * out

    return AmplitudeField(evaluate=evaluate)


def multicenter_field(centers, mom: Momenta) -> AmplitudeField:
    """Amplitude field that assembles once and solves per incident direction."""
    centers = tuple(centers)
    if len(centers) < 1:
        raise ValueError("at least one center required")
    _check_nonoverlap(centers)
    big = _block_matrix(centers, mom)
    cond = np.linalg.cond(big)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise PoleError(f"multi-center system singular (cond ~ {cond:.3e})", cond=cond)
    lu_piv = sla.lu_factor(big)
    nch = len(mom)
    s4pi = math.sqrt(4.0 * math.pi)

    def evaluate(n: np.ndarray, n0: np.ndarray) -> np.ndarray:
        rhs = _rhs_for(centers, mom, n0)
        sol = sla.lu_solve(lu_piv, rhs)
        out = np.zeros((nch, nch), dtype=complex)
        for i, ci in enumerate(centers):
            a = np.diag(matrix_A(ci.channels, n))
            phase = np.exp(-1j * mom.k * float(np.dot(n, ci.position)))
            out += (a * phase)[:, None] * sol[i * nch : (i + 1) * nch]
        return s4pi * out

    return AmplitudeField(evaluate=evaluate)
