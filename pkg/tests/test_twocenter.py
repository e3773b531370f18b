import cmath
import math

import numpy as np
import pytest

from zrpscatter.channels import compute_momenta
from zrpscatter.twocenter import (
    ThetaValues,
    TwoCenterModel,
    amplitude_F00,
    amplitude_F10,
    build_H_matrix,
    excited_momentum,
    find_poles,
    general_two_center_amplitude,
    potential_curves,
    rotate_amplitude,
    theta0,
    theta1,
)


def make_model(**kw):
    base = dict(
        alpha0=0.3,
        alpha1=0.45,
        c=0.2,
        l=1,
        m=0,
        eta0=1,
        eta1=-1,
        R=1.1,
        excitation_energy=0.05,
    )
    base.update(kw)
    return TwoCenterModel(**base)


def random_model(rng):
    l = int(rng.integers(0, 3))
    return TwoCenterModel(
        alpha0=float(rng.uniform(-1, 1)),
        alpha1=float(rng.uniform(-1, 1)),
        c=float(rng.uniform(0.05, 0.5)),
        l=l,
        m=int(rng.integers(-l, l + 1)),
        eta0=int(rng.choice([1, -1])),
        eta1=int(rng.choice([1, -1])),
        R=float(rng.uniform(0.6, 2.0)),
        excitation_energy=float(rng.uniform(0.0, 0.04)),
    )


def random_direction(rng):
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def test_model_validation():
    with pytest.raises(ValueError):
        make_model(R=-1.0)
    with pytest.raises(ValueError):
        make_model(l=0, m=1)
    with pytest.raises(ValueError):
        make_model(eta0=0)
    with pytest.raises(ValueError):
        make_model(excitation_energy=-0.1)


def test_excited_momentum_branches():
    assert excited_momentum(0.9, 0.05) == pytest.approx(math.sqrt(0.81 - 0.1), rel=1e-14)
    # closed channel decays
    assert excited_momentum(0.2, 0.05) == pytest.approx(1j * math.sqrt(0.1 - 0.04), rel=1e-14)
    # analytic on the imaginary axis: the decaying continuation
    assert excited_momentum(0.5j, 0.05) == pytest.approx(1j * math.sqrt(0.25 + 0.1), rel=1e-14)
    # continuous across the imaginary axis
    left = excited_momentum(-1e-12 + 0.5j, 0.05)
    right = excited_momentum(+1e-12 + 0.5j, 0.05)
    assert abs(left - right) < 1e-10
    with pytest.raises(ValueError):
        excited_momentum(0.0, 0.05)


def test_theta_frozen():
    k1 = excited_momentum(0.9, 0.05)
    assert theta0(1, 0.3, 0.9, 1.1) == pytest.approx(
        0.11914596645912903 + 1.3170172524008226j, rel=1e-13
    )
    assert theta1(-1, 0.45, k1, 1, 0, 1.1) == pytest.approx(
        -0.6660154463749057 + 0.6952212777907102j, rel=1e-13
    )
    # theta0 literal form
    x, a, k, r = -1, 0.2, 0.7, 1.3
    assert theta0(x, a, k, r) == pytest.approx(
        a + 1j * k + x * cmath.exp(2j * k * r) / (2 * r), rel=1e-14
    )
    # s-wave theta1 has the same structure as theta0 with k1
    assert theta1(1, 0.4, k1, 0, 0, 0.8) == pytest.approx(
        theta0(1, 0.4, k1, 0.8), rel=1e-14
    )


def test_theta_values_denominators():
    m = make_model()
    k0, k1 = m.momenta(0.9)
    tv = ThetaValues.compute(m, k0, k1)
    assert tv.denom_plus == pytest.approx(
        tv.theta0_plus * tv.theta1_plus - m.c**2, rel=1e-14
    )
    assert tv.denom_minus == pytest.approx(
        tv.theta0_minus * tv.theta1_minus - m.c**2, rel=1e-14
    )


def test_H_matrix_s_wave_closed_form():
    m = make_model(l=0, m=0)
    cs = m.channel_set()
    mom = compute_momenta(cs, 0.9)
    d = 2.2
    h = build_H_matrix(cs, mom, np.array([0.0, 0.0, d]))
    # s channels: H_aa = k_a h_0(k_a d) = e^{i k_a d} / d
    for a in range(2):
        ka = mom.k[a]
        assert h[a, a] == pytest.approx(cmath.exp(1j * ka * d) / d, rel=1e-13)


def test_H_matrix_channel_diagonal_and_frozen():
    m = make_model()
    mom = compute_momenta(m.channel_set(), 0.9)
    h = build_H_matrix(m.channel_set(), mom, np.array([0.0, 0.0, 2.2]))
    assert h[0, 1] == 0.0 and h[1, 0] == 0.0
    assert h[0, 0] == pytest.approx(-0.18085403 + 0.41701725j, abs=1e-7)
    assert h[1, 1] == pytest.approx(-1.57185274 + 0.13656992j, abs=1e-7)


def test_H_matrix_gaunt_vs_quadrature_off_axis():
    m = make_model(l=2, m=1)
    mom = compute_momenta(m.channel_set(), 0.8)
    sep = np.array([1.1, -0.4, 1.7])
    hg = build_H_matrix(m.channel_set(), mom, sep, method="gaunt")
    hq = build_H_matrix(m.channel_set(), mom, sep, method="quadrature")
    assert np.allclose(hg, hq, atol=1e-12)
    with pytest.raises(ValueError):
        build_H_matrix(m.channel_set(), mom, np.zeros(3))
    with pytest.raises(ValueError):
        build_H_matrix(m.channel_set(), mom, sep, method="bogus")


def test_parity_and_block_methods_agree():
    rng = np.random.default_rng(3)
    for _ in range(5):
        m = random_model(rng)
        mom = compute_momenta(m.channel_set(), float(rng.uniform(0.4, 1.4)))
        fp = general_two_center_amplitude(m.interaction(), m.channel_set(), mom, m.R)
        fb = general_two_center_amplitude(
            m.interaction(), m.channel_set(), mom, m.R, method="block"
        )
        n, n0 = random_direction(rng), random_direction(rng)
        assert np.allclose(fp(n, n0), fb(n, n0), atol=1e-12)


def test_closed_forms_match_general_matrix_amplitude():
    rng = np.random.default_rng(12)
    for _ in range(10):
        m = random_model(rng)
        mom = compute_momenta(m.channel_set(), float(rng.uniform(0.4, 1.4)))
        gen = general_two_center_amplitude(m.interaction(), m.channel_set(), mom, m.R)
        f00 = amplitude_F00(m, mom)
        f10 = amplitude_F10(m, mom)
        n, n0 = random_direction(rng), random_direction(rng)
        g = gen(n, n0)
        assert complex(f00(n, n0)) == pytest.approx(g[0, 0], abs=1e-12)
        assert complex(f10(n, n0)) == pytest.approx(g[1, 0], abs=1e-12)


def test_closed_form_frozen():
    m = make_model()
    mom = compute_momenta(m.channel_set(), 0.9)
    n = np.array([0.2, 0.3, 0.5])
    n /= np.linalg.norm(n)
    n0 = np.array([0.0, 0.0, 1.0])
    assert complex(amplitude_F00(m, mom)(n, n0)) == pytest.approx(
        -1.2849574803225976 + 1.8701270997738693j, rel=1e-12
    )
    assert complex(amplitude_F10(m, mom)(n, n0)) == pytest.approx(
        -0.010747540967984016 - 0.1330867913538428j, rel=1e-12
    )


def test_uncoupled_limit():
    m = make_model(c=0.0)
    mom = compute_momenta(m.channel_set(), 0.9)
    f10 = amplitude_F10(m, mom)
    f00 = amplitude_F00(m, mom)
    n = np.array([0.48, -0.6, 0.64])
    n /= np.linalg.norm(n)
    n0 = np.array([0.0, 0.0, 1.0])
    assert abs(complex(f10(n, n0))) == 0.0
    # elastic channel reduces to the one-state two-center amplitude
    k0 = mom.k[0]
    a, b = k0 * m.R * n[2], k0 * m.R * n0[2]
    t0p = theta0(+1, m.alpha0, k0, m.R)
    t0m = theta0(-1, m.alpha0, k0, m.R)
    single = -2.0 * np.cos(a) * np.cos(b) / t0p - 2.0 * np.sin(a) * np.sin(b) / t0m
    assert complex(f00(n, n0)) == pytest.approx(single, rel=1e-13)


def test_find_poles_frozen():
    m = TwoCenterModel(
        alpha0=0.5, alpha1=0.7, c=0.15, l=0, m=0, eta0=1, eta1=1, R=1.0,
        excitation_energy=0.05,
    )
    g = find_poles(m, "gerade", (-0.1, 0.1, 0.3, 1.2))
    assert len(g) == 2
    assert g[0] == pytest.approx(0.5537735839702069j, abs=1e-10)
    assert g[1] == pytest.approx(0.825094360511525j, abs=1e-10)
    u = find_poles(m, "ungerade", (-0.1, 0.1, 0.05, 1.2))
    assert len(u) == 1
    assert u[0] == pytest.approx(0.581118702898163j, abs=1e-10)
    with pytest.raises(ValueError):
        find_poles(m, "gerade", (0.2, 0.1, 0.0, 1.0))
    with pytest.raises(ValueError):
        find_poles(m, "sideways", (0.0, 0.1, 0.0, 1.0))


def test_potential_curves_frozen_and_validation():
    m = TwoCenterModel(
        alpha0=0.5, alpha1=0.7, c=0.15, l=0, m=0, eta0=1, eta1=1, R=1.0,
        excitation_energy=0.05,
    )
    pts = potential_curves(m, [1.0, 1.5, 2.0], "gerade", 0.55j)
    assert [p.R for p in pts] == [1.0, 1.5, 2.0]
    assert pts[0].k0 == pytest.approx(0.5537735839702065j, abs=1e-10)
    assert pts[1].k0 == pytest.approx(0.4676228024040487j, abs=1e-10)
    assert pts[2].k0 == pytest.approx(0.4299140180391982j, abs=1e-10)
    assert pts[0].energy == pytest.approx(0.5 * pts[0].k0 ** 2, rel=1e-13)
    with pytest.raises(ValueError):
        potential_curves(m, [2.0, 1.0], "gerade", 0.55j)
    with pytest.raises(ValueError):
        potential_curves(m, [-1.0, 1.0], "gerade", 0.55j)


def test_rotate_amplitude():
    m = make_model()
    mom = compute_momenta(m.channel_set(), 0.9)
    field = general_two_center_amplitude(m.interaction(), m.channel_set(), mom, m.R)
    th = 0.7
    rot = np.array(
        [
            [math.cos(th), 0.0, math.sin(th)],
            [0.0, 1.0, 0.0],
            [-math.sin(th), 0.0, math.cos(th)],
        ]
    )
    rfield = rotate_amplitude(field, rot)
    n = np.array([0.1, 0.5, 0.86])
    n /= np.linalg.norm(n)
    n0 = np.array([0.0, 0.0, 1.0])
    # evaluating the rotated field at rotated directions recovers the original
    assert np.allclose(rfield(rot @ n, rot @ n0), field(n, n0), atol=1e-13)
    with pytest.raises(ValueError):
        rotate_amplitude(field, 2.0 * np.eye(3))
