import numpy as np
import pytest

from zrpscatter.channels import Channel, ChannelSet, compute_momenta
from zrpscatter.multicenter import (
    CenterSpec,
    assemble_system,
    multicenter_amplitude,
    multicenter_field,
    parity_partner,
    solve_multicenter,
)
from zrpscatter.specfun import AngularIndex
from zrpscatter.twocenter import TwoCenterModel, general_two_center_amplitude
from zrpscatter.zrp_core import InteractionW, angular_amplitude, build_one_center_F


def s_wave_setup():
    cs = ChannelSet(channels=(Channel("g", 0.0, AngularIndex(0, 0), +1),))
    w = InteractionW(w=np.array([[0.8]]), l=[0])
    return cs, w


def random_direction(rng):
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def test_single_center_reduces_to_one_center():
    cs, w = s_wave_setup()
    mom = compute_momenta(cs, 0.7)
    centers = [CenterSpec(np.zeros(3), 0.1, cs, w)]
    fld = multicenter_field(centers, mom)
    ref = angular_amplitude(build_one_center_F(w, mom), cs)
    rng = np.random.default_rng(0)
    for _ in range(4):
        n, n0 = random_direction(rng), random_direction(rng)
        assert np.allclose(fld(n, n0), ref(n, n0), atol=1e-13)


def test_two_centers_match_twocenter_module():
    m = TwoCenterModel(
        alpha0=0.3, alpha1=0.45, c=0.2, l=1, m=0, eta0=1, eta1=-1, R=1.1,
        excitation_energy=0.05,
    )
    cs = m.channel_set()
    w = m.interaction()
    mom = compute_momenta(cs, 0.9)
    centers = [
        CenterSpec(np.array([0.0, 0.0, m.R]), 0.1, cs, w),
        CenterSpec(np.array([0.0, 0.0, -m.R]), 0.1, cs, parity_partner(w, cs)),
    ]
    fld = multicenter_field(centers, mom)
    ref = general_two_center_amplitude(w, cs, mom, m.R)
    rng = np.random.default_rng(1)
    for _ in range(4):
        n, n0 = random_direction(rng), random_direction(rng)
        assert np.allclose(fld(n, n0), ref(n, n0), atol=1e-12)


def test_parity_partner_involution():
    m = TwoCenterModel(
        alpha0=0.3, alpha1=0.45, c=0.2, l=1, m=0, eta0=1, eta1=-1, R=1.1
    )
    cs = m.channel_set()
    w = m.interaction()
    ww = parity_partner(parity_partner(w, cs), cs)
    assert np.allclose(ww.w, w.w, atol=1e-15)


def test_three_center_frozen():
    cs, w = s_wave_setup()
    mom = compute_momenta(cs, 0.7)
    centers = [
        CenterSpec(np.array([0.0, 0.0, 1.0]), 0.1, cs, w),
        CenterSpec(np.array([0.0, 0.0, -1.0]), 0.1, cs, w),
        CenterSpec(np.array([1.2, 0.0, 0.0]), 0.1, cs, w),
    ]
    fld = multicenter_field(centers, mom)
    z = np.array([0.0, 0.0, 1.0])
    assert complex(fld(z, z)[0, 0]) == pytest.approx(
        -1.673336319999612 + 1.097704482209557j, rel=1e-12
    )


def test_assemble_solve_matches_field():
    cs, w = s_wave_setup()
    mom = compute_momenta(cs, 0.7)
    centers = [
        CenterSpec(np.array([0.0, 0.0, 1.0]), 0.1, cs, w),
        CenterSpec(np.array([0.9, 0.0, -0.4]), 0.1, cs, w),
    ]
    n0 = np.array([0.0, 0.6, 0.8])
    sys = assemble_system(centers, mom, n0)
    blocks = solve_multicenter(sys)
    amp = multicenter_amplitude(centers, blocks, mom)
    fld = multicenter_field(centers, mom)
    n = np.array([1.0, 0.0, 0.0])
    assert np.allclose(amp(n, n0), fld(n, n0), atol=1e-12)


def test_overlap_rejected():
    cs, w = s_wave_setup()
    mom = compute_momenta(cs, 0.7)
    centers = [
        CenterSpec(np.array([0.0, 0.0, 0.0]), 0.6, cs, w),
        CenterSpec(np.array([0.0, 0.0, 1.0]), 0.6, cs, w),
    ]
    with pytest.raises(ValueError):
        multicenter_field(centers, mom)


def test_shared_channel_set_required():
    cs, w = s_wave_setup()
    cs2 = ChannelSet(channels=(Channel("other", 0.0, AngularIndex(1, 0), -1),))
    w2 = InteractionW(w=np.array([[0.5]]), l=[1])
    mom = compute_momenta(cs, 0.7)
    centers = [
        CenterSpec(np.array([0.0, 0.0, 1.0]), 0.1, cs, w),
        CenterSpec(np.array([0.0, 0.0, -1.0]), 0.1, cs2, w2),
    ]
    with pytest.raises(ValueError):
        assemble_system(centers, mom, np.array([0.0, 0.0, 1.0]))


def test_center_spec_validation():
    cs, w = s_wave_setup()
    with pytest.raises(ValueError):
        CenterSpec(np.zeros(3), -0.5, cs, w)
    with pytest.raises(ValueError):
        assemble_system([], compute_momenta(cs, 0.7), np.array([0.0, 0.0, 1.0]))
