"""Finite-dimensional quantum channel calculus.

Choi operators, Stinespring dilations of channels, compositions and link
products, channel fidelity with its n-fold decay, and the Pauli-diagonal qubit
families.
"""

from chanlink.channel import (
    Channel,
    CPTPReport,
    KrausSet,
    apply,
    choi_from_kraus,
    compose_channel,
    identity_channel,
    kraus_from_choi,
    random_channel,
    random_isometry,
    tensor_channel,
    unitary_channel,
    verify_cptp,
)
from chanlink.dilation import (
    Isometry,
    apply_dilation,
    direct_composition_dilation,
    indirect_composition_dilation,
    link_dilation_direct,
    link_dilation_indirect,
    minimal_dilation,
)
from chanlink.errors import *  # noqa: F401,F403
from chanlink.fidelity import (
    FidelityReport,
    SweepResult,
    channel_fidelity,
    discrimination_sweep,
    state_fidelity,
    uhlmann_overlap,
)
from chanlink.link import LinkSpec, link_product, self_link_power
from chanlink.pauli import (
    PauliDiagonalChannel,
    commutes,
    eigen_fidelity,
    family_choi,
    make_family,
    pauli_transfer,
    uhlmann_maximizer,
)
from chanlink.tensor import (
    EigenDecomposition,
    LabeledOperator,
    Leg,
    double_ket_identity,
    hermitian_eig,
    kron,
    partial_trace,
    partial_transpose,
    permute_legs,
    psd_sqrt,
)

__version__ = "0.1.0"
