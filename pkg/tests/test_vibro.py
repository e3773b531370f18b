import math
import warnings

import numpy as np
import pytest
from numpy.polynomial.hermite import hermgauss
from numpy.polynomial.legendre import leggauss

from zrpscatter.channels import compute_momenta
from zrpscatter.twocenter import TwoCenterModel
from zrpscatter.vibro import (
    AdiabaticModel,
    B_lm,
    ClosedChannelError,
    Q_lambda_mu,
    TransitionSpec,
    VibModel,
    _theta0_any_r,
    _theta1_any_r,
    ics_fixed_R,
    vib_matrix_element,
    vib_wavefunction,
)


def narrow_setup(k0=0.4):
    model = TwoCenterModel(
        alpha0=0.2, alpha1=0.15, c=0.1, l=0, m=0, eta0=1, eta1=-1, R=0.7,
        excitation_energy=0.02,
    )
    vib = VibModel(R_e=0.7, omega=0.06, mu=918.0, n_basis=16)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        ad = AdiabaticModel(model, vib)
    mom = compute_momenta(model.channel_set(), k0)
    return model, vib, ad, mom


def test_vib_model_validation_and_levels():
    with pytest.raises(ValueError):
        VibModel(R_e=-1.0, omega=0.01, mu=918.0)
    with pytest.raises(ValueError):
        VibModel(R_e=0.7, omega=0.01, mu=918.0, n_basis=0)
    vm = VibModel(R_e=0.7, omega=0.01, mu=918.0)
    assert vm.level_energy(3) == pytest.approx(0.035)
    assert vm.scale == pytest.approx(math.sqrt(9.18))
    with pytest.warns(UserWarning):
        VibModel(R_e=0.1, omega=0.001, mu=10.0)  # wide ground state


def test_vib_wavefunction_normalized_and_frozen():
    vm = VibModel(R_e=0.7, omega=0.06, mu=918.0, n_basis=16)
    s, w = hermgauss(80)
    for v in (0, 3, 7):
        r = vm.R_e + s / vm.scale
        vals = np.array([vib_wavefunction(vm, v, ri) for ri in r])
        # undo the Gaussian weight carried by the wavefunction product
        norm = np.sum(w * vals * vals * np.exp(s * s)) / vm.scale
        assert norm == pytest.approx(1.0, rel=1e-10)
    assert vib_wavefunction(vm, 3, 0.75) == pytest.approx(-1.1149847686272298, rel=1e-12)
    with pytest.raises(ValueError):
        vib_wavefunction(vm, 16, 0.7)


def test_vib_matrix_element_orthonormality_and_frozen():
    vm = VibModel(R_e=0.7, omega=0.06, mu=918.0, n_basis=16)
    for v, v0 in ((0, 0), (3, 3), (2, 5)):
        me = vib_matrix_element(vm, v, v0, lambda r: 1.0)
        assert me == pytest.approx(1.0 if v == v0 else 0.0, abs=1e-12)
    assert vib_matrix_element(vm, 2, 0, lambda r: r * r) == pytest.approx(
        0.012837813747032472, rel=1e-10
    )
    with pytest.raises(ValueError):
        vib_matrix_element(vm, 16, 0, lambda r: 1.0)


def test_B_lm_identities():
    for x in np.linspace(0.1, 25.0, 17):
        assert B_lm(0, 0, x) == pytest.approx(math.sin(x) / x, rel=1e-13)
    for l, m in ((0, 0), (1, 0), (2, 2), (3, 1)):
        assert B_lm(l, m, 0.0) == pytest.approx(1.0, rel=1e-14)
    assert B_lm(2, 1, 3.7) == pytest.approx(-0.5322615348299046, rel=1e-12)
    with pytest.raises(ValueError):
        B_lm(1, 2, 1.0)


def test_transition_degeneracy():
    assert TransitionSpec.degeneracy(0) == 1
    assert TransitionSpec.degeneracy(2) == 2
    assert TransitionSpec.degeneracy(-1) == 2


def test_theta_continuations_negative_r():
    # negative-R continuation agrees with the literal formula evaluated there
    k0, k1 = 0.4 + 0.0j, 0.3 + 0.0j
    r = -0.8
    import cmath

    ref0 = 0.2 + 1j * k0 + 1.0 * cmath.exp(2j * k0 * r) / (2.0 * r)
    assert _theta0_any_r(1, 0.2, k0, r) == pytest.approx(ref0, rel=1e-14)
    # s-wave theta1 matches theta0 structure at negative r too
    assert _theta1_any_r(-1, 0.2, k1, 0, 0, r) == pytest.approx(
        0.2 + 1j * k1 - cmath.exp(2j * k1 * r) / (2.0 * r), rel=1e-14
    )
    assert _theta0_any_r(1, 0.2, k0, 0.0) == complex(np.inf)


def test_adiabatic_mode_validation():
    model, vib, _, _ = narrow_setup()
    with pytest.raises(ValueError):
        AdiabaticModel(model, vib, mode="sideways")


def test_closed_channel_errors():
    model, vib, ad, _ = narrow_setup()
    mom = compute_momenta(model.channel_set(), 0.15)  # below excitation threshold
    with pytest.raises(ClosedChannelError):
        ad.final_momentum(1, 0, 0, mom)
    with pytest.raises(ClosedChannelError):
        ad.ics_closure(1, 0, mom)
    # resolved mode: high-v final level closed
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        adr = AdiabaticModel(model, vib, mode="resolved")
    mom2 = compute_momenta(model.channel_set(), 0.21)
    with pytest.raises(ClosedChannelError):
        adr.final_momentum(1, 10, 0, mom2)


def test_resolved_momentum_accounts_for_vibrational_energy():
    model, vib, _, mom = narrow_setup(0.6)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        adr = AdiabaticModel(model, vib, mode="resolved")
    k = adr.final_momentum(1, 2, 0, mom)
    assert k == pytest.approx(
        math.sqrt(mom.k0**2 - 2 * model.excitation_energy - 2 * 2 * vib.omega), rel=1e-13
    )


def test_Q_parity_selection():
    model, vib, ad, mom = narrow_setup()
    tr0 = TransitionSpec(n=0, v=1, v0=0, M_n=1)
    tr1 = TransitionSpec(n=1, v=1, v0=0, M_n=1)
    z = np.array([0.0, 0.0, 1.0])
    n = np.array([0.6, 0.0, 0.8])
    # elastic standing waves share parity: odd lambda killed exactly
    for lam in (1, 3, 5):
        for mu in range(-lam, lam + 1):
            assert Q_lambda_mu(ad, lam, mu, n, z, tr0, mom) == 0.0
    # eta1 (-1)^l = -1 against eta0 = +1: even lambda killed in the excitation
    for lam in (0, 2, 4):
        for mu in range(-lam, lam + 1):
            assert Q_lambda_mu(ad, lam, mu, n, z, tr1, mom) == 0.0


def test_dcs_frozen_and_positive():
    _, _, ad, mom = narrow_setup()
    val = ad.dcs(TransitionSpec(1, 1, 0, 1), 0.37, mom)
    assert val == pytest.approx(0.001247521639457775, rel=1e-10)
    xs = np.linspace(-1.0, 1.0, 21)
    for x in xs:
        assert ad.dcs(TransitionSpec(0, 0, 0, 1), float(x), mom) >= 0.0


def test_ics_matches_angular_quadrature_refinement():
    _, _, ad, mom = narrow_setup()
    tr = TransitionSpec(1, 0, 0, 1)
    i48 = ad.ics_vib(tr, mom, 48)
    i96 = ad.ics_vib(tr, mom, 96)
    assert i48 == pytest.approx(0.10478340987834778, rel=1e-10)
    assert abs(i48 - i96) <= 1e-8 * abs(i96)


def test_closure_and_fixed_R_frozen():
    _, _, ad, mom = narrow_setup()
    assert ad.ics_closure(0, 0, mom) == pytest.approx(36.98042743383556, rel=1e-10)
    assert ad.ics_fixed_R(0, mom) == pytest.approx(37.16585034485118, rel=1e-10)
    assert ics_fixed_R(ad, 0, mom) == ad.ics_fixed_R(0, mom)


def test_dcs_against_orientation_average_oracle():
    # independent oracle: rotate the fixed-nuclei closed-form amplitude over
    # molecular orientations, vibrationally average, and integrate |F|^2
    model, vib, ad, mom = narrow_setup()
    k0 = mom.k0
    k1 = model.momenta(k0)[1].real
    s, w_gh = hermgauss(64)
    r_nodes = vib.R_e + s / vib.scale
    herm0 = np.array([vib_wavefunction(vib, 0, r) for r in r_nodes])
    herm1 = np.array([vib_wavefunction(vib, 1, r) for r in r_nodes])
    # strip the Gaussian weight double count: chi_v chi_v0 dR = w_gh h_v h_v0
    wts = w_gh * herm0 * herm1 * np.exp(s * s) / vib.scale
    t0p = np.array([_theta0_any_r(+1, model.alpha0, k0, r) for r in r_nodes])
    t0m = np.array([_theta0_any_r(-1, model.alpha0, k0, r) for r in r_nodes])
    t1p = np.array([_theta1_any_r(-1, model.alpha1, k1, 0, 0, r) for r in r_nodes])
    t1m = np.array([_theta1_any_r(+1, model.alpha1, k1, 0, 0, r) for r in r_nodes])
    dp = t0p * t1p - model.c**2
    dm = t0m * t1m - model.c**2

    cos_scat = 0.37
    sin_scat = math.sqrt(1.0 - cos_scat**2)
    n = np.array([sin_scat, 0.0, cos_scat])
    n0 = np.array([0.0, 0.0, 1.0])
    xb, wb = leggauss(24)
    gammas = 2.0 * math.pi * np.arange(24) / 24
    acc = 0.0
    for cb, wbi in zip(xb, wb):
        sb = math.sqrt(1.0 - cb * cb)
        for gam in gammas:
            axis = np.array([sb * math.cos(gam), sb * math.sin(gam), cb])
            az, az0 = float(axis @ n), float(axis @ n0)
            # body-frame excitation amplitude, eta0 = +1, eta1 (-1)^l = -1
            fvals = (
                math.sqrt(math.pi) * model.c * (
                    (-2j * np.sin(k1 * r_nodes * az))
                    * (2.0 * np.cos(k0 * r_nodes * az0)) / dp
                    + (2.0 * np.cos(k1 * r_nodes * az))
                    * (2j * np.sin(k0 * r_nodes * az0)) / dm
                ) / math.sqrt(4.0 * math.pi)
            )
            me = np.sum(wts * fvals)
            acc += wbi * abs(me) ** 2
    acc *= 2.0 * math.pi / 24 / (4.0 * math.pi)
    oracle = (k1 / k0) * acc
    lib = ad.dcs(TransitionSpec(1, 1, 0, 1), cos_scat, mom)
    assert lib == pytest.approx(oracle, rel=1e-10)


def test_narrow_limit_fixed_R_consistency():
    # stiff vibration: single-level elastic ICS approaches the frozen-nuclei value
    model = TwoCenterModel(
        alpha0=0.4, alpha1=0.35, c=0.1, l=0, m=0, eta0=1, eta1=-1, R=2.5,
        excitation_energy=0.05,
    )
    vib = VibModel(R_e=2.5, omega=2.0, mu=918.076, n_basis=4)
    ad = AdiabaticModel(model, vib, n_vib_nodes=64)
    mom = compute_momenta(model.channel_set(), 0.5)
    for n in (0, 1):
        i00 = ad.ics_vib(TransitionSpec(n, 0, 0, 1), mom)
        ref = ad.ics_fixed_R(n, mom)
        assert abs(i00 - ref) <= 1e-4 * ref
