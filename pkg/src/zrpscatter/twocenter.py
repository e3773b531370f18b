"""Two matrix-ZRP problem for a symmetric diatomic.

Inter-center propagator matrix H, the theta shorthand functions, closed-form
elastic and excitation amplitudes of the two-state model, the general
gerade/ungerade matrix amplitude, resonance pole search in the complex
entrance-momentum plane, and adiabatic potential curves E(R) traced from the
pole condition theta0(+-eta0) theta1(+-eta1) = c^2.

Conventions: centers sit at +-R on the body-frame z axis (separation 2R).
The gerade branch uses theta evaluated at +eta, the ungerade branch at -eta.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .channels import Channel, ChannelSet, Momenta, compute_momenta, kpow, matrix_A
from .specfun import (
    AngularIndex,
    gaunt3,
    gaunt_yyP,
    hankel_outgoing_h,
    legendre_p_all,
    sph_harm_angles,
)
from .zrp_core import AmplitudeField, InteractionW, PoleError, _inverse_F_matrix

__all__ = [
    "TwoCenterModel",
    "ThetaValues",
    "theta0",
    "theta1",
    "build_H_matrix",
    "scalar_H_kernel",
    "amplitude_F00",
    "amplitude_F10",
    "general_two_center_amplitude",
    "find_poles",
    "potential_curves",
    "rotate_amplitude",
    "PoleCountMismatch",
]

COND_LIMIT = 1e12


@dataclass(frozen=True)
class TwoCenterModel:
    """Two-channel two-center model: s ground state coupled to an (l, m) state.

    alpha0, alpha1 are channel strengths, c the coupling, eta0/eta1 the channel
    parities, R the half internuclear distance (centers at +-R).  The excited
    state may sit at excitation_energy above the ground state.
    """

    alpha0: float
    alpha1: float
    c: float
    l: int
    m: int
    eta0: int
    eta1: int
    R: float
    excitation_energy: float = 0.0

    def __post_init__(self):
        if self.R <= 0:
            raise ValueError("R must be positive")
        if self.l < abs(self.m):
            raise ValueError("l >= |m| required")
        if self.eta0 not in (+1, -1) or self.eta1 not in (+1, -1):
            raise ValueError("parities must be +-1")
        if self.excitation_energy < 0:
            raise ValueError("excitation energy must be >= 0")

    def channel_set(self) -> ChannelSet:
        return ChannelSet(
            channels=(
                Channel("ground", 0.0, AngularIndex(0, 0), self.eta0),
                Channel(
                    "excited",
                    self.excitation_energy,
                    AngularIndex(self.l, self.m),
                    self.eta1,
                ),
            )
        )

    def interaction(self) -> InteractionW:
        w0 = np.array([[self.alpha0, self.c], [self.c, self.alpha1]], dtype=complex)
        return InteractionW.from_w0(w0, [0, self.l])

    def momenta(self, k0: complex) -> tuple[complex, complex]:
        """(k0, k1) with the Im k1 >= 0 continuation, valid for complex k0."""
        k1 = excited_momentum(k0, self.excitation_energy)
        return complex(k0), k1


def excited_momentum(k0: complex, excitation_energy: float) -> complex:
    """k1(k0) = k0 sqrt(1 - 2 E1 / k0^2), the odd branch of sqrt(k0^2 - 2 E1).

    On the real axis this gives real positive k1 for open channels and
    i sqrt(2 E1 - k0^2) for closed ones.  The only branch cut is the real
    segment |k0| < sqrt(2 E1), so the function is analytic across the
    imaginary axis where bound-state poles sit (k1(i kappa) =
    i sqrt(kappa^2 + 2 E1), the decaying continuation).
    """
    k0 = complex(k0)
    if k0 == 0:
        raise ValueError("k0 must be nonzero")
    return k0 * cmath.sqrt(1.0 - 2.0 * excitation_energy / (k0 * k0))


def theta0(x: float, alpha0: float, k0: complex, R: float) -> complex:
    """theta0(x) = alpha0 + i k0 + x e^{2 i k0 R} / (2R)."""
    if R <= 0:
        raise ValueError("R must be positive")
    return alpha0 + 1j * k0 + x * cmath.exp(2j * k0 * R) / (2.0 * R)


def theta1(x: float, alpha1: float, k1: complex, l: int, m: int, R: float) -> complex:
    """theta1(x) = alpha1 + i k1^(2l+1) + x * (interference sum over even lambda)."""
    if R <= 0:
        raise ValueError("R must be positive")
    if l < abs(m):
        raise ValueError("l >= |m| required")
    k1 = complex(k1)
    k2lp1 = kpow(k1, 2 * l + 1)
    s = 0.0j
    for lam in range(0, 2 * l + 1, 2):
        s += (
            (1j) ** (2 * l + lam)
            * (2 * lam + 1)
            * k2lp1
            * hankel_outgoing_h(lam, 2.0 * k1 * R)
            * gaunt_yyP(l, m, lam)
        )
    return alpha1 + 1j * k2lp1 + x * s


@dataclass(frozen=True)
class ThetaValues:
    """theta functions at +-eta and the two pole denominators."""

    theta0_plus: complex
    theta0_minus: complex
    theta1_plus: complex
    theta1_minus: complex
    denom_plus: complex
    denom_minus: complex

    @classmethod
    def compute(cls, model: TwoCenterModel, k0: complex, k1: complex) -> "ThetaValues":
        t0p = theta0(model.eta0, model.alpha0, k0, model.R)
        t0m = theta0(-model.eta0, model.alpha0, k0, model.R)
        t1p = theta1(model.eta1, model.alpha1, k1, model.l, model.m, model.R)
        t1m = theta1(-model.eta1, model.alpha1, k1, model.l, model.m, model.R)
        c2 = model.c * model.c
        return cls(t0p, t0m, t1p, t1m, t0p * t1p - c2, t0m * t1m - c2)


def scalar_H_kernel(r_vec: np.ndarray, u: np.ndarray, k: float, lmax: int) -> complex:
    """Truncated expansion of the angular kernel H(r, u; k) for a scalar channel.

    (k / 4pi) sum_lam i^lam (2 lam + 1) h_lam(k r) P_lam(rhat . u).  The series
    is asymptotic pointwise; it is meaningful only under angular integrals
    against smooth functions, truncated at lmax.
    """
    r_vec = np.asarray(r_vec, dtype=float)
    r = np.linalg.norm(r_vec)
    if r == 0:
        raise ValueError("zero separation")
    cosg = float(np.dot(r_vec / r, np.asarray(u, dtype=float)))
    cosg = min(1.0, max(-1.0, cosg))
    p = legendre_p_all(lmax, np.array(cosg))
    acc = 0.0j
    for lam in range(lmax + 1):
        acc += (1j) ** lam * (2 * lam + 1) * hankel_outgoing_h(lam, k * r) * float(p[lam])
    return k / (4.0 * math.pi) * acc


def _angular_integral_PY(l: int, m: int, lam: int, rhat: np.ndarray) -> float:
    # integral of |Y_lm(n)|^2 P_lam(rhat.n) over the sphere; rhat = z reduces
    # to gaunt_yyP.  The m-balance leaves only the mu = 0 expansion term.
    rhat = np.asarray(rhat, dtype=float)
    theta = math.acos(min(1.0, max(-1.0, rhat[2])))
    y0 = sph_harm_angles(lam, 0, theta, 0.0).real
    g = (-1) ** m * gaunt3(l, -m, lam, 0, l, m)
    return 4.0 * math.pi / (2 * lam + 1) * y0 * g


def _angular_integral_PY_quad(
    l: int, m: int, lam: int, rhat: np.ndarray, n_theta: int = 64, n_phi: int = 32
) -> float:
    from numpy.polynomial.legendre import leggauss

    x, wx = leggauss(n_theta)
    phis = 2.0 * math.pi * np.arange(n_phi) / n_phi
    rhat = np.asarray(rhat, dtype=float)
    acc = 0.0
    for xi, wi in zip(x, wx):
        th = math.acos(xi)
        for ph in phis:
            n = np.array(
                [math.sin(th) * math.cos(ph), math.sin(th) * math.sin(ph), xi]
            )
            val = (
                abs(sph_harm_angles(l, m, th, ph)) ** 2
                * legendre_p_all(lam, np.array(float(np.dot(rhat, n))))[lam]
            )
            acc += wi * float(val)
    return acc * (2.0 * math.pi / n_phi)


def build_H_matrix(
    cs: ChannelSet, mom: Momenta, separation: np.ndarray, method: str = "gaunt"
) -> np.ndarray:
    """Inter-center matrix H = 4 pi int A^+(n) H(d, n; K) A(-n) dOmega.

    Diagonal in channel space: propagation between centers preserves the
    channel.  Entry (a, a) is the coefficient with which a unit outgoing wave
    of channel a at one center feeds the regular solution of the same channel
    at the other.  `separation` is the vector between the centers (2R for the
    symmetric diatomic; only its length and axis enter, the lambda sum is
    even).  `method` selects the 3-j closed form ('gaunt') or product
    quadrature for the angular integrals ('quadrature').
    """
    separation = np.asarray(separation, dtype=float)
    d = np.linalg.norm(separation)
    if d == 0:
        raise ValueError("zero separation between centers")
    rhat = separation / d
    nch = len(cs)
    larr, marr = cs.l, cs.m
    out = np.zeros((nch, nch), dtype=complex)
    for a in range(nch):
        ka = mom.k[a]
        la, ma = int(larr[a]), int(marr[a])
        acc = 0.0j
        for lam in range(0, 2 * la + 1, 2):
            if method == "gaunt":
                ang = _angular_integral_PY(la, ma, lam, rhat)
            elif method == "quadrature":
                ang = _angular_integral_PY_quad(la, ma, lam, rhat)
            else:
                raise ValueError(f"unknown method {method!r}")
            if ang == 0.0:
                continue
            acc += (1j) ** lam * (2 * lam + 1) * hankel_outgoing_h(lam, ka * d) * ang
        out[a, a] = ka * acc
    return out


def _field_from_parity_blocks(
    cs: ChannelSet, mom: Momenta, minv_g: np.ndarray, minv_u: np.ndarray, R: float
) -> AmplitudeField:
    eta = cs.parities.astype(complex)
    k = mom.k
    rvec = np.array([0.0, 0.0, R])

    def evaluate(n: np.ndarray, n0: np.ndarray) -> np.ndarray:
        a = np.diag(matrix_A(cs, n))
        am = np.diag(matrix_A(cs, -n))
        a0 = np.diag(matrix_A(cs, n0)).conj()
        a0m = np.diag(matrix_A(cs, -n0)).conj()
        ph = np.exp(-1j * k * float(np.dot(n, rvec)))
        ph0 = np.exp(1j * k * float(np.dot(n0, rvec)))
        up = a * ph + eta * am / ph
        um = a * ph - eta * am / ph
        vp = a0 * ph0 + eta * a0m / ph0
        vm = a0 * ph0 - eta * a0m / ph0
        return 2.0 * math.pi * (
            up[:, None] * minv_g * vp[None, :] + um[:, None] * minv_u * vm[None, :]
        )

    return AmplitudeField(evaluate=evaluate)


def general_two_center_amplitude(
    w: InteractionW,
    cs: ChannelSet,
    mom: Momenta,
    R: float,
    method: str = "parity",
) -> AmplitudeField:
    """Full matrix amplitude of two parity-related matrix ZRPs at +-R on z.

    'parity' inverts the gerade/ungerade blocks (F^-1 -+ Sigma H)^-1 directly;
    'block' solves the coupled linear system for C1, C2 instead.  Both paths
    agree to numerical precision.
    """
    if R <= 0:
        raise ValueError("R must be positive")
    finv = -_inverse_F_matrix(w, mom)
    h = build_H_matrix(cs, mom, np.array([0.0, 0.0, 2.0 * R]))
    # the image center emits in the A(-n) Sigma basis: couple Sigma D H
    sig = np.diag((cs.parities * (-1) ** cs.l).astype(complex))
    mg = finv - sig @ h
    mu = finv + sig @ h
    for name, mat in (("gerade", mg), ("ungerade", mu)):
        cond = np.linalg.cond(mat)
        if not np.isfinite(cond) or cond > COND_LIMIT:
            raise PoleError(
                f"{name} block singular (cond ~ {cond:.3e}): amplitude pole",
                cond=cond,
                branch=name,
            )
    if method == "parity":
        return _field_from_parity_blocks(cs, mom, np.linalg.inv(mg), np.linalg.inv(mu), R)
    if method == "block":
        return _field_from_block_system(cs, mom, finv, sig @ h, R)
    raise ValueError(f"unknown method {method!r}")


def _field_from_block_system(
    cs: ChannelSet, mom: Momenta, finv: np.ndarray, sh: np.ndarray, R: float
) -> AmplitudeField:
    nch = len(cs)
    eta = cs.parities.astype(complex)
    k = mom.k
    rvec = np.array([0.0, 0.0, R])
    big = np.zeros((2 * nch, 2 * nch), dtype=complex)
    big[:nch, :nch] = finv
    big[:nch, nch:] = -sh
    big[nch:, :nch] = -sh
    big[nch:, nch:] = finv
    lu_piv = None
    import scipy.linalg as sla

    lu_piv = sla.lu_factor(big)
    s4pi = math.sqrt(4.0 * math.pi)

    def evaluate(n: np.ndarray, n0: np.ndarray) -> np.ndarray:
        a0 = np.diag(matrix_A(cs, n0)).conj()
        a0m = np.diag(matrix_A(cs, -n0)).conj()
        ph0 = np.exp(1j * k * float(np.dot(n0, rvec)))
        rhs = np.zeros((2 * nch, nch), dtype=complex)
        rhs[:nch] = s4pi * np.diag(a0 * ph0)
        rhs[nch:] = s4pi * np.diag(eta * a0m / ph0)
        c = sla.lu_solve(lu_piv, rhs)
        c1, c2 = c[:nch], c[nch:]
        a = np.diag(matrix_A(cs, n))
        am = np.diag(matrix_A(cs, -n))
        ph = np.exp(-1j * k * float(np.dot(n, rvec)))
        return s4pi * ((a * ph)[:, None] * c1 + (eta * am / ph)[:, None] * c2)

    return AmplitudeField(evaluate=evaluate)


def _trig_out(x: complex, eps: int) -> complex:
    # outgoing-side standing-wave factor e^{-ix} + eps e^{ix}
    return 2.0 * np.cos(x) if eps == +1 else -2j * np.sin(x)


def _trig_in(x: complex, eps: int) -> complex:
    # incident-side standing-wave factor e^{ix} + eps e^{-ix}
    return 2.0 * np.cos(x) if eps == +1 else 2j * np.sin(x)


def amplitude_F00(model: TwoCenterModel, mom: Momenta) -> AmplitudeField:
    """Closed-form elastic amplitude F00(n, n0) of the two-state model (body frame).

    The entrance channel couples through cos(k0 n.R) factors on the
    plus-denominator branch when eta0 = +1 and through sin factors when
    eta0 = -1 (the parity of the standing wave follows the channel parity).
    """
    k0, k1 = mom.k[0], mom.k[1]
    tv = ThetaValues.compute(model, k0, k1)
    _check_denominators(tv)
    R = model.R
    eps0 = model.eta0

    def evaluate(n: np.ndarray, n0: np.ndarray) -> np.ndarray:
        a = k0 * R * n[2]
        b = k0 * R * n0[2]
        val = 0.5 * (
            _trig_out(a, eps0) * _trig_in(b, eps0) * (-tv.theta1_plus) / tv.denom_plus
            + _trig_out(a, -eps0)
            * _trig_in(b, -eps0)
            * (-tv.theta1_minus)
            / tv.denom_minus
        )
        return np.array(val, dtype=complex)

    return AmplitudeField(evaluate=evaluate)


def amplitude_F10(model: TwoCenterModel, mom: Momenta) -> AmplitudeField:
    """Closed-form excitation amplitude F10(n, n0) of the two-state model (body frame).

    The outgoing channel carries cos(k1 n.R) on the plus-denominator branch
    when its effective parity eta1 (-1)^l is +1 and sin otherwise; the
    incident channel follows eta0 the same way.  This assignment is the one
    consistent with the general gerade/ungerade matrix amplitude.
    """
    k0, k1 = mom.k[0], mom.k[1]
    tv = ThetaValues.compute(model, k0, k1)
    _check_denominators(tv)
    R = model.R
    c = model.c
    k1l = kpow(k1, model.l)
    pref = math.sqrt(math.pi) * c * k1l
    eps0 = model.eta0
    eps1 = model.eta1 * (-1) ** model.l

    def evaluate(n: np.ndarray, n0: np.ndarray) -> np.ndarray:
        a = k1 * R * n[2]
        b = k0 * R * n0[2]
        theta_n = math.acos(min(1.0, max(-1.0, float(n[2]))))
        phi_n = math.atan2(n[1], n[0])
        ylm = sph_harm_angles(model.l, model.m, theta_n, phi_n)
        val = pref * ylm * (
            _trig_out(a, eps1) * _trig_in(b, eps0) / tv.denom_plus
            + _trig_out(a, -eps1) * _trig_in(b, -eps0) / tv.denom_minus
        )
        return np.array(val, dtype=complex)

    return AmplitudeField(evaluate=evaluate)


def _check_denominators(tv: ThetaValues) -> None:
    if abs(tv.denom_plus) < 1e-12:
        raise PoleError("gerade denominator vanishes", branch="gerade")
    if abs(tv.denom_minus) < 1e-12:
        raise PoleError("ungerade denominator vanishes", branch="ungerade")


def rotate_amplitude(field: AmplitudeField, rotation: np.ndarray) -> AmplitudeField:
    """Evaluate a body-frame field in a rotated frame.

    `rotation` is the 3x3 matrix taking body-frame vectors to lab-frame
    vectors (its last column is the lab direction of the molecular axis).
    Scalar products n.R are invariant; only the angular factors move.
    """
    rot = np.asarray(rotation, dtype=float)
    if rot.shape != (3, 3) or abs(abs(np.linalg.det(rot)) - 1.0) > 1e-10:
        raise ValueError("rotation must be a proper 3x3 rotation matrix")

    def evaluate(n: np.ndarray, n0: np.ndarray) -> np.ndarray:
        return field(rot.T @ n, rot.T @ n0)

    return AmplitudeField(evaluate=evaluate)


class PoleCountMismatch(RuntimeError):
    """Argument-principle count disagrees with the converged Newton roots."""

    def __init__(self, winding: int, roots: list[complex]):
        super().__init__(
            f"argument principle counts {winding} roots, Newton found {len(roots)}: {roots}"
        )
        self.winding = winding
        self.roots = roots


def _pole_denominator(model: TwoCenterModel, branch: str):
    if branch == "gerade":
        s = +1
    elif branch == "ungerade":
        s = -1
    else:
        raise ValueError("parity_branch must be 'gerade' or 'ungerade'")

    def f(k0: complex) -> complex:
        k1 = excited_momentum(k0, model.excitation_energy)
        t0 = theta0(s * model.eta0, model.alpha0, k0, model.R)
        t1 = theta1(s * model.eta1, model.alpha1, k1, model.l, model.m, model.R)
        return t0 * t1 - model.c * model.c

    return f


def _winding_number(f, corners: list[complex], n_per_side: int = 256) -> int:
    pts = []
    for i in range(4):
        a, b = corners[i], corners[(i + 1) % 4]
        for t in np.linspace(0.0, 1.0, n_per_side, endpoint=False):
            pts.append(a + (b - a) * t)
    vals = [f(p) for p in pts]
    total = 0.0
    for i in range(len(vals)):
        v0, v1 = vals[i], vals[(i + 1) % len(vals)]
        if v0 == 0 or v1 == 0:
            raise PoleError("root on the search-rectangle boundary")
        dphi = cmath.phase(v1 / v0)
        if abs(dphi) > 0.5 * math.pi:
            # refine this segment
            p0, p1 = pts[i], pts[(i + 1) % len(pts)]
            sub = np.linspace(0.0, 1.0, 33)
            sv = [f(p0 + (p1 - p0) * t) for t in sub]
            dphi = sum(
                cmath.phase(sv[j + 1] / sv[j]) for j in range(len(sv) - 1)
            )
        total += dphi
    return int(round(total / (2.0 * math.pi)))


def _newton_polish(f, z0: complex, tol: float = 1e-12, maxit: int = 60) -> complex | None:
    z = z0
    for _ in range(maxit):
        fz = f(z)
        if abs(fz) < tol:
            return z
        h = 1e-7 * max(1.0, abs(z))
        df = (f(z + h) - f(z - h)) / (2.0 * h)
        if df == 0:
            return None
        step = fz / df
        if not np.isfinite(abs(step)):
            return None
        # damp wild steps
        if abs(step) > 0.5:
            step *= 0.5 / abs(step)
        z = z - step
    return z if abs(f(z)) < 1e-10 else None


def find_poles(
    model: TwoCenterModel,
    parity_branch: str,
    search: tuple[float, float, float, float],
    n_seeds: int = 12,
) -> list[complex]:
    """All roots of the pole denominator inside a complex-k0 rectangle.

    `search` is (re_min, re_max, im_min, im_max).  Roots are located by
    argument-principle counting on the boundary followed by Newton polishing
    from a grid of seeds; a count mismatch raises PoleCountMismatch.
    """
    re0, re1, im0, im1 = search
    if re1 <= re0 or im1 <= im0:
        raise ValueError("empty search rectangle")
    f = _pole_denominator(model, parity_branch)
    corners = [
        complex(re0, im0),
        complex(re1, im0),
        complex(re1, im1),
        complex(re0, im1),
    ]
    winding = _winding_number(f, corners)
    roots: list[complex] = []
    for x in np.linspace(re0, re1, n_seeds + 2)[1:-1]:
        for y in np.linspace(im0, im1, n_seeds + 2)[1:-1]:
            z = _newton_polish(f, complex(x, y))
            if z is None:
                continue
            if not (re0 - 1e-12 <= z.real <= re1 + 1e-12 and im0 - 1e-12 <= z.imag <= im1 + 1e-12):
                continue
            if abs(f(z)) >= 1e-10:
                continue
            if all(abs(z - r) > 1e-7 for r in roots):
                roots.append(z)
    if len(roots) != winding:
        raise PoleCountMismatch(winding, roots)
    return sorted(roots, key=lambda z: (z.real, z.imag))


@dataclass(frozen=True)
class CurvePoint:
    R: float
    k0: complex
    energy: complex  # k0^2 / 2; Im E = -Gamma/2


def potential_curves(
    model: TwoCenterModel,
    R_values,
    parity_branch: str,
    k0_seed: complex,
) -> list[CurvePoint]:
    """Pole track k0(R) over an R grid, seeded and continued point to point.

    Stops with a RuntimeError naming the last good R if the track is lost.
    """
    R_values = list(R_values)
    if any(r <= 0 for r in R_values):
        raise ValueError("R grid must be positive")
    if any(b <= a for a, b in zip(R_values, R_values[1:])):
        raise ValueError("R grid must be strictly increasing")
    points: list[CurvePoint] = []
    seed = complex(k0_seed)
    from dataclasses import replace

    for R in R_values:
        mR = replace(model, R=R)
        f = _pole_denominator(mR, parity_branch)
        z = _newton_polish(f, seed)
        if z is None or abs(f(z)) > 1e-10:
            last = points[-1].R if points else None
            raise RuntimeError(
                f"pole track lost at R = {R} (last good R = {last})"
            )
        points.append(CurvePoint(R=R, k0=z, energy=0.5 * z * z))
        seed = z
    return points
