"""Link products of channels over shared legs.

For ``m`` with outputs ``(1, 3)`` and ``n`` with inputs ``(3, 5)`` linked on leg
``3``, the result is ``(id_1 ⊗ n) ∘ (m ⊗ id_5)`` with Choi operator

    N * M = Tr_3[(N ⊗ I_{012}) (I_{456} ⊗ M^{T_3})].

Result leg order: surviving outputs (``m``'s, then ``n``'s), then surviving
inputs (``m``'s, then ``n``'s).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Iterable

from chanlink.channel import Channel, tensor_channel
from chanlink.errors import LinkError, ShapeError, TooLarge
from chanlink.tensor import (
    LabeledOperator,
    Leg,
    embed,
    get_max_dim,
    partial_trace,
    partial_transpose,
)


@dataclass(frozen=True)
class LinkSpec:
    """``left`` consumes, on the ``shared`` legs, what ``right`` produces.

    In ``left ⋆ right`` the right channel acts first.
    """

    shared: tuple
    left: Channel
    right: Channel

    def __post_init__(self):
        shared = tuple(dict.fromkeys(self.shared))
        object.__setattr__(self, "shared", shared)
        n, m = self.left, self.right
        out_dims = {l.label: l.dim for l in m.out_legs}
        in_dims = {l.label: l.dim for l in n.in_legs}
        for lab in shared:
            if lab not in out_dims:
                raise LinkError(f"shared leg {lab!r} is not an output of the first channel {m.out_labels}")
            if lab not in in_dims:
                raise LinkError(f"shared leg {lab!r} is not an input of the second channel {n.in_labels}")
            if out_dims[lab] != in_dims[lab]:
                raise LinkError(
                    f"shared leg {lab!r} has dim {out_dims[lab]} on output but {in_dims[lab]} on input"
                )
        rest_m = set(m.in_labels + m.out_labels) - set(shared)
        rest_n = set(n.in_labels + n.out_labels) - set(shared)
        clash = rest_m & rest_n
        if clash:
            raise LinkError(f"non-shared legs appear on both channels: {sorted(map(repr, clash))}")

    @property
    def side_out(self) -> tuple[Leg, ...]:
        """Outputs of the first channel that are not fed forward."""
        return tuple(l for l in self.right.out_legs if l.label not in self.shared)

    @property
    def side_in(self) -> tuple[Leg, ...]:
        """Inputs of the second channel that bypass the first."""
        return tuple(l for l in self.left.in_legs if l.label not in self.shared)

    @property
    def shared_legs(self) -> tuple[Leg, ...]:
        return tuple(l for l in self.right.out_legs if l.label in self.shared)

    @property
    def result_out(self) -> tuple[Leg, ...]:
        return self.side_out + self.left.out_legs

    @property
    def result_in(self) -> tuple[Leg, ...]:
        return self.right.in_legs + self.side_in


def link_product(n: Channel, m: Channel, shared: Iterable[Hashable]) -> Channel:
    """``n ⋆ m``: feed ``m``'s ``shared`` outputs into ``n``; everything else passes by.

    With no shared legs this is the tensor product; with every output of ``m``
    shared it is the plain composition ``n ∘ m``.

    Raises:
        LinkError: shared legs missing or mismatched, or other labels clash.
    """
    spec = LinkSpec(tuple(shared), n, m)
    shared_labels = [l.label for l in spec.shared_legs]
    legs = spec.result_out + spec.shared_legs + spec.result_in
    left = embed(n.choi, legs)
    right = embed(partial_transpose(m.choi, shared_labels), legs)
    prod = LabeledOperator(legs, left.data @ right.data)
    choi = partial_trace(prod, shared_labels)
    data = (choi.data + choi.data.conj().T) / 2
    return Channel(spec.result_in, spec.result_out, data)


def _copy_label(label: Hashable, k: int) -> Hashable:
    return f"{label}.{k}" if isinstance(label, str) else (label, k)


def self_link_power(m: Channel, n: int, max_dim: int | None = None) -> Channel:
    """The ``n``-fold self-link of ``m``, whose Choi is ``J^{⊗n}``.

    Copy ``k`` (1-based) of each leg ``x`` is labeled ``"x.k"`` (or ``(x, k)``
    for non-string labels). Legs are ordered all outputs, then all inputs.

    Raises:
        TooLarge: if the Choi side ``(d_out * d_in)**n`` exceeds the guard.
    """
    if n < 1:
        raise ShapeError(f"self-link power needs n >= 1, got {n}")
    if n == 1:
        return m
    limit = get_max_dim() if max_dim is None else max_dim
    side = (m.d_out * m.d_in) ** n
    if side > limit:
        raise TooLarge(f"{n}-fold self-link has Choi side {side}, above the guard {limit}")
    copies = [
        m.relabel({lab: _copy_label(lab, k) for lab in m.in_labels + m.out_labels})
        for k in range(1, n + 1)
    ]
    out = copies[0]
    for c in copies[1:]:
        out = tensor_channel(out, c, limit)
    return out
