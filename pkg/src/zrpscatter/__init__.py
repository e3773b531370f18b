"""Multi-channel zero-range-potential scattering engine.

One-center, two-center, and N-center matrix scattering amplitudes, resonance
pole search, and electron-vibrational cross sections for diatomic models.
"""

from .channels import Channel, ChannelSet, Momenta, compute_momenta, kpow, matrix_A
from .multicenter import (
    CenterSpec,
    MultiCenterSystem,
    assemble_system,
    multicenter_amplitude,
    multicenter_field,
    parity_partner,
    solve_multicenter,
)
from .specfun import (
    AngularIndex,
    QuadratureRule,
    gaunt3,
    gaunt_yyP,
    hankel_outgoing_h,
    legendre_p,
    sph_harm,
    sph_harm_angles,
    sph_harm_vec,
    spherical_bessel_j,
    wigner3j,
)
from .twocenter import (
    PoleCountMismatch,
    ThetaValues,
    TwoCenterModel,
    amplitude_F00,
    amplitude_F10,
    build_H_matrix,
    find_poles,
    general_two_center_amplitude,
    potential_curves,
    rotate_amplitude,
    theta0,
    theta1,
)
from .vibro import (
    AdiabaticModel,
    B_lm,
    ClosedChannelError,
    TransitionSpec,
    VibModel,
    dcs,
    ics_closure,
    ics_fixed_R,
    ics_vib,
    vib_matrix_element,
    vib_wavefunction,
)
from .zrp_core import (
    AmplitudeField,
    InteractionW,
    OneCenterF,
    PoleError,
    angular_amplitude,
    build_one_center_F,
    one_channel_gzrp,
    reactance_matrix,
    small_r_asymptotics_check,
    two_state_inverse_F,
)

__version__ = "0.1.0"
