"""Stinespring dilations of channels, compositions and link products.

An :class:`Isometry` maps the input legs into ``out ⊗ anc``; its channel is
``rho -> Tr_anc[V rho V†]``. Single-channel dilations follow

    V = (I_out ⊗ (J^T)^{1/2}) (|I_out>> ⊗ I_in),

whose ancilla is a copy of ``out ⊗ in``. The minimal variant compresses that
ancilla onto the support of ``J^T`` (eigenvalues above ``1e-10 * lambda_max``,
in the deterministic order of :func:`~chanlink.tensor.hermitian_eig`).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Iterable

import numpy as np

from chanlink.channel import RANK_RTOL, Channel, compose_channel, verify_cptp, _operator_on
from chanlink.errors import NotCPTP, NotIsometry, ShapeError
from chanlink.link import LinkSpec, link_product
from chanlink.tensor import (
    LabeledOperator,
    Leg,
    as_legs,
    double_ket_identity,
    hermitian_eig,
    permute_tensor_axes,
    prod_dims,
    psd_sqrt,
)

ISOMETRY_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Isometry:
    """``v`` has shape ``(d_out * d_anc, d_in)``; rows are ordered ``out ++ anc``."""

    in_legs: tuple[Leg, ...]
    out_legs: tuple[Leg, ...]
    anc_legs: tuple[Leg, ...]
    v: np.ndarray

    def __post_init__(self):
        for name in ("in_legs", "out_legs", "anc_legs"):
            object.__setattr__(self, name, as_legs(getattr(self, name)))
        v = np.array(self.v, dtype=complex)
        shape = (self.d_out * self.d_anc, self.d_in)
        if v.shape != shape:
            raise ShapeError(f"isometry matrix has shape {v.shape}, legs need {shape}")
        v.setflags(write=False)
        object.__setattr__(self, "v", v)
        err = self.isometry_error()
        if err > ISOMETRY_TOL:
            raise NotIsometry(f"max|V†V - I| = {err:.3e} exceeds {ISOMETRY_TOL}")

    @property
    def d_in(self) -> int:
        return prod_dims(self.in_legs)

    @property
    def d_out(self) -> int:
        return prod_dims(self.out_legs)

    @property
    def d_anc(self) -> int:
        return prod_dims(self.anc_legs)

    @property
    def anc_dims(self) -> tuple[int, ...]:
        return tuple(leg.dim for leg in self.anc_legs)

    def isometry_error(self) -> float:
        return float(np.max(np.abs(self.v.conj().T @ self.v - np.eye(self.d_in))))


def _require_cptp(c: Channel) -> None:
    report = verify_cptp(c)
    if not report.ok:
        raise NotCPTP(
            f"not a valid channel: cp_gap={report.cp_gap:.3e}, tp_gap={report.tp_gap:.3e}"
        )


def minimal_dilation(m: Channel, anc_label: Hashable = "A", compress: bool = True) -> Isometry:
    """Stinespring isometry of ``m`` built from the square root of its transposed Choi.

    With ``compress=False`` the ancilla is the full ``d_out * d_in`` space the
    formula produces; otherwise it is cut down to the support of the Choi
    operator, so its dimension equals the Choi rank.

    Raises:
        NotCPTP: if ``m`` fails :func:`~chanlink.channel.verify_cptp`.
    """
    _require_cptp(m)
    d_in, d_out = m.d_in, m.d_out
    jt = m.choi.data.T
    root = psd_sqrt(jt)
    ket = double_ket_identity(d_out)[:, None]
    v = np.kron(np.eye(d_out), root) @ np.kron(ket, np.eye(d_in))
    if not compress:
        return Isometry(m.in_legs, m.out_legs, (Leg(anc_label, d_out * d_in),), v)
    decomp = hermitian_eig(jt)
    w = decomp.eigenvalues
    rank = int(np.count_nonzero(w > RANK_RTOL * max(float(w[0]), 0.0)))
    support = decomp.eigenvectors[:, :rank]
    v = np.kron(np.eye(d_out), support.conj().T) @ v
    return Isometry(m.in_legs, m.out_legs, (Leg(anc_label, rank),), v)


def indirect_composition_dilation(n: Channel, m: Channel) -> Isometry:
    """``V = (V_n ⊗ I_{A1}) V_m`` from the two minimal dilations.

    Ancilla legs are ``A1`` (from ``m``) then ``A2`` (from ``n``), so the
    ancilla dimension is ``rank(J_m) * rank(J_n)``.
    """
    if [l.dim for l in m.out_legs] != [l.dim for l in n.in_legs]:
        raise ShapeError("first channel's outputs do not match the second channel's inputs")
    v1 = minimal_dilation(m, "A1")
    v2 = minimal_dilation(n, "A2")
    r1, r2 = v1.d_anc, v2.d_anc
    v = np.kron(v2.v, np.eye(r1)) @ v1.v
    v = permute_tensor_axes(v, [n.d_out, r2, r1], [0, 2, 1])
    return Isometry(m.in_legs, n.out_legs, (Leg("A1", r1), Leg("A2", r2)), v)


def direct_composition_dilation(n: Channel, m: Channel) -> Isometry:
    """Single-ancilla dilation of ``n ∘ m`` with ancilla dimension ``rank(J_{n∘m})``.

    Built as the minimal dilation of the composite Choi
    ``Tr_mid[(N ⊗ I)(I ⊗ M^{T_mid})]``.
    """
    return minimal_dilation(compose_channel(n, m))


def link_dilation_indirect(n: Channel, m: Channel, shared: Iterable[Hashable]) -> Isometry:
    """``V = (I_side ⊗ V_n ⊗ I_{A1}) (V_m ⊗ I_bypass)`` for the link ``n ⋆ m``.

    ``side`` are outputs of ``m`` that are not shared; ``bypass`` are inputs of
    ``n`` that do not come from ``m``. Legs match :func:`~chanlink.link.link_product`.
    """
    spec = LinkSpec(tuple(shared), n, m)
    v1 = minimal_dilation(m, "A1")
    v2 = minimal_dilation(n, "A2")
    r1, r2 = v1.d_anc, v2.d_anc
    bypass = spec.side_in
    d_bypass = prod_dims(bypass)
    step = np.kron(v1.v, np.eye(d_bypass))

    # rows now: m.out..., A1, bypass...; bring to side_out..., n.in..., A1
    anc1 = object()
    keys = list(m.out_labels) + [anc1] + [l.label for l in bypass]
    dims = [l.dim for l in m.out_legs] + [r1] + [l.dim for l in bypass]
    target = [l.label for l in spec.side_out] + list(n.in_labels) + [anc1]
    step = permute_tensor_axes(step, dims, [keys.index(k) for k in target])

    d_side = prod_dims(spec.side_out)
    step = np.kron(np.kron(np.eye(d_side), v2.v), np.eye(r1)) @ step
    # rows: side_out, n.out, A2, A1 -> side_out, n.out, A1, A2
    step = permute_tensor_axes(step, [d_side, n.d_out, r2, r1], [0, 1, 3, 2])
    return Isometry(
        spec.result_in, spec.result_out, (Leg("A1", r1), Leg("A2", r2)), step
    )


def link_dilation_direct(n: Channel, m: Channel, shared: Iterable[Hashable]) -> Isometry:
    """Minimal dilation of the link product ``n ⋆ m``; ancilla dim is its Choi rank."""
    return minimal_dilation(link_product(n, m, shared))


def apply_dilation(v: Isometry, rho) -> LabeledOperator:
    """``Tr_anc[V rho V†]`` on the output legs."""
    x = _operator_on(rho, v.in_legs)
    full = v.v @ x @ v.v.conj().T
    t = full.reshape(v.d_out, v.d_anc, v.d_out, v.d_anc)
    return LabeledOperator(v.out_legs, np.trace(t, axis1=1, axis2=3))
