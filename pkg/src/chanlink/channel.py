"""Quantum channels stored by their Choi operator.

The Choi operator of a map ``M`` from legs ``in`` to legs ``out`` is

    J = (M ⊗ id)(|I>><<I|)

on ``out ++ in`` (output legs first). A channel acts through

    M(X) = Tr_in[(I_out ⊗ X^T) J].
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Iterable, Sequence

import numpy as np

from chanlink.errors import LabelCollision, ShapeError, NotTracePreserving
from chanlink.tensor import (
    LabeledOperator,
    Leg,
    as_legs,
    embed,
    hermitian_eig,
    kron,
    partial_trace,
    partial_transpose,
    permute_legs,
    prod_dims,
    vec,
)

CPTP_TOL = 1e-9
RANK_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class Channel:
    """A linear map given by its Choi operator on ``out_legs ++ in_legs``.

    ``choi`` may be passed as a bare matrix, in which case it is wrapped with the
    declared legs. Construction only checks structure; use :func:`verify_cptp`
    to check complete positivity and trace preservation.
    """

    in_legs: tuple[Leg, ...]
    out_legs: tuple[Leg, ...]
    choi: LabeledOperator

    def __post_init__(self):
        in_legs = as_legs(self.in_legs)
        out_legs = as_legs(self.out_legs)
        legs = out_legs + in_legs
        choi = self.choi
        if not isinstance(choi, LabeledOperator):
            choi = LabeledOperator(legs, choi)
        elif choi.labels != tuple(leg.label for leg in legs):
            choi = permute_legs(choi, [leg.label for leg in legs])
        if choi.legs != legs:
            raise ShapeError(f"Choi legs {choi.legs} do not match out ++ in legs {legs}")
        object.__setattr__(self, "in_legs", in_legs)
        object.__setattr__(self, "out_legs", out_legs)
        object.__setattr__(self, "choi", choi)

    @property
    def d_in(self) -> int:
        return prod_dims(self.in_legs)

    @property
    def d_out(self) -> int:
        return prod_dims(self.out_legs)

    @property
    def in_labels(self) -> tuple:
        return tuple(leg.label for leg in self.in_legs)

    @property
    def out_labels(self) -> tuple:
        return tuple(leg.label for leg in self.out_legs)

    def relabel(self, mapping) -> "Channel":
        def ren(legs):
            return tuple(Leg(mapping.get(l.label, l.label), l.dim) for l in legs)

        return Channel(ren(self.in_legs), ren(self.out_legs), self.choi.relabel(mapping))

    def __repr__(self):
        ins = ", ".join(f"{l.label!r}:{l.dim}" for l in self.in_legs)
        outs = ", ".join(f"{l.label!r}:{l.dim}" for l in self.out_legs)
        return f"Channel([{ins}] -> [{outs}])"


@dataclass(frozen=True, eq=False)
class KrausSet:
    operators: tuple[np.ndarray, ...]

    def __post_init__(self):
        ops = tuple(np.array(a, dtype=complex) for a in self.operators)
        if not ops:
            raise ShapeError("a Kraus set needs at least one operator")
        shape = ops[0].shape
        if any(a.ndim != 2 or a.shape != shape for a in ops):
            raise ShapeError("Kraus operators must be matrices of one common shape")
        object.__setattr__(self, "operators", ops)

    @property
    def shape(self) -> tuple[int, int]:
        return self.operators[0].shape

    def __len__(self):
        return len(self.operators)

    def __iter__(self):
        return iter(self.operators)

    def completeness_gap(self) -> float:
        total = sum(a.conj().T @ a for a in self.operators)
        return float(np.max(np.abs(total - np.eye(self.shape[1]))))

    def apply(self, x: np.ndarray) -> np.ndarray:
        return sum(a @ x @ a.conj().T for a in self.operators)


@dataclass(frozen=True)
class CPTPReport:
    cp_gap: float
    tp_gap: float
    hermitian_gap: float
    ok: bool


def _default_legs(legs, dim: int, label: Hashable) -> tuple[Leg, ...]:
    if legs is None:
        return (Leg(label, dim),)
    return as_legs(legs)


def choi_from_kraus(kraus, in_legs=None, out_legs=None) -> Channel:
    """Build a channel from Kraus operators, ``J = sum_i |A_i>><<A_i|``.

    Leg lists default to a single input leg ``"0"`` and output leg ``"1"``.

    Raises:
        ShapeError: if the operator shape disagrees with the legs.
        NotTracePreserving: if ``max|sum A_i† A_i - I| > 1e-9``.
    """
    k = kraus if isinstance(kraus, KrausSet) else KrausSet(tuple(kraus))
    d_out, d_in = k.shape
    in_legs = _default_legs(in_legs, d_in, "0")
    out_legs = _default_legs(out_legs, d_out, "1")
    if prod_dims(in_legs) != d_in or prod_dims(out_legs) != d_out:
        raise ShapeError(f"Kraus shape {k.shape} does not match legs out={out_legs} in={in_legs}")
    gap = k.completeness_gap()
    if gap > CPTP_TOL:
        raise NotTracePreserving(f"Kraus completeness violated by {gap:.3e}")
    vs = np.stack([vec(a) for a in k.operators], axis=1)
    return Channel(in_legs, out_legs, vs @ vs.conj().T)


def kraus_from_choi(c: Channel) -> KrausSet:
    """Canonical Kraus operators, one per Choi eigenvalue above ``1e-10 * lambda_max``."""
    decomp = hermitian_eig(c.choi)
    w = decomp.eigenvalues
    keep = w > RANK_RTOL * max(float(w[0]), 0.0)
    ops = [
        np.sqrt(lam) * decomp.eigenvectors[:, i].reshape(c.d_out, c.d_in)
        for i, lam in enumerate(w)
        if keep[i]
    ]
    return KrausSet(tuple(ops))


def _operator_on(x, legs: tuple[Leg, ...]) -> np.ndarray:
    if isinstance(x, LabeledOperator):
        labels = tuple(leg.label for leg in legs)
        if x.labels != labels and set(x.labels) == set(labels):
            x = permute_legs(x, labels)
        if x.dims != tuple(leg.dim for leg in legs):
            raise ShapeError(f"operator legs {x.legs} do not match {legs}")
        return x.data
    x = np.asarray(x, dtype=complex)
    side = prod_dims(legs)
    if x.shape != (side, side):
        raise ShapeError(f"operator shape {x.shape} does not match input dimension {side}")
    return x


def apply(c: Channel, x) -> LabeledOperator:
    """Apply ``c`` to ``x`` via ``Tr_in[(I_out ⊗ X^T) J]``.

    ``x`` may be a :class:`LabeledOperator` on the input legs or a bare matrix.
    """
    xm = _operator_on(x, c.in_legs)
    j = c.choi.data.reshape(c.d_out, c.d_in, c.d_out, c.d_in)
    return LabeledOperator(c.out_legs, np.einsum("aibj,ij->ab", j, xm))


def verify_cptp(c: Channel, tol: float = CPTP_TOL) -> CPTPReport:
    """Report how far ``c`` is from being completely positive and trace preserving.

    ``cp_gap`` is ``-min(0, lambda_min(J))`` and ``tp_gap`` is
    ``max|Tr_out J - I|``. Never raises.
    """
    data = c.choi.data
    herm = float(np.max(np.abs(data - data.conj().T)))
    w = np.linalg.eigvalsh((data + data.conj().T) / 2)
    cp_gap = float(-min(0.0, w[0])) + 0.0
    reduced = partial_trace(c.choi, c.out_labels).data
    tp_gap = float(np.max(np.abs(reduced - np.eye(c.d_in))))
    return CPTPReport(cp_gap, tp_gap, herm, cp_gap <= tol and tp_gap <= tol and herm <= tol)


def tensor_channel(a: Channel, b: Channel, max_dim: int | None = None) -> Channel:
    """Choi of ``a ⊗ b`` is the Kronecker product of the Chois, legs reordered.

    ``max_dim`` overrides the dimension guard for the Kronecker product.
    """
    labels = a.out_labels + b.out_labels + a.in_labels + b.in_labels
    if len(set(labels)) != len(labels):
        raise LabelCollision(f"channels share leg labels: {labels}")
    choi = permute_legs(kron(a.choi, b.choi, max_dim), labels)
    return Channel(a.in_legs + b.in_legs, a.out_legs + b.out_legs, choi)


class _Mid:
    """Private label for the contracted legs of a composition."""

    __slots__ = ("k",)

    def __init__(self, k: int):
        self.k = k

    def __eq__(self, other):
        return isinstance(other, _Mid) and other.k == self.k

    def __hash__(self):
        return hash(("_Mid", self.k))

    def __repr__(self):
        return f"<mid {self.k}>"


def compose_channel(n: Channel, m: Channel) -> Channel:
    """Choi of ``n ∘ m`` (``m`` first), ``Tr_mid[(N ⊗ I_in)(I_out ⊗ M^{T_mid})]``.

    ``m``'s output legs are matched to ``n``'s input legs by position, so only
    their dimensions need to agree. The result keeps ``m``'s input legs and
    ``n``'s output legs.
    """
    if [l.dim for l in m.out_legs] != [l.dim for l in n.in_legs]:
        raise ShapeError(
            f"cannot compose: first channel outputs {[l.dim for l in m.out_legs]}, "
            f"second expects {[l.dim for l in n.in_legs]}"
        )
    if set(n.out_labels) & set(m.in_labels):
        raise LabelCollision(f"output labels {n.out_labels} collide with input labels {m.in_labels}")
    mid = [Leg(_Mid(i), leg.dim) for i, leg in enumerate(m.out_legs)]
    mid_labels = [leg.label for leg in mid]
    m_choi = m.choi.relabel(dict(zip(m.out_labels, mid_labels)))
    n_choi = n.choi.relabel(dict(zip(n.in_labels, mid_labels)))
    legs = n.out_legs + tuple(mid) + m.in_legs
    left = embed(n_choi, legs)
    right = embed(partial_transpose(m_choi, mid_labels), legs)
    prod = LabeledOperator(legs, left.data @ right.data)
    choi = partial_trace(prod, mid_labels)
    data = (choi.data + choi.data.conj().T) / 2
    return Channel(m.in_legs, n.out_legs, data)


def identity_channel(legs: Iterable = None, d: int = 2, out_legs: Iterable = None) -> Channel:
    """The identity channel.

    With no legs given this is ``"0" -> "1"`` on dimension ``d``; otherwise the
    output legs default to the inputs relabeled with a ``'`` suffix.
    """
    if legs is None:
        in_legs = (Leg("0", d),)
        out_legs = (Leg("1", d),) if out_legs is None else out_legs
    else:
        in_legs = as_legs(legs)
    if out_legs is None:
        out_legs = tuple(Leg(f"{leg.label}'", leg.dim) for leg in in_legs)
    return choi_from_kraus([np.eye(prod_dims(in_legs))], in_legs, out_legs)


def unitary_channel(u: np.ndarray, in_legs=None, out_legs=None) -> Channel:
    return choi_from_kraus([np.asarray(u, dtype=complex)], in_legs, out_legs)


def random_isometry(d_in: int, d_out: int, rng: np.random.Generator | None = None) -> np.ndarray:
    """Haar-random isometry ``d_out x d_in`` (QR of a Ginibre matrix with phase fix)."""
    if d_out < d_in:
        raise ShapeError(f"an isometry needs d_out >= d_in, got {d_out} < {d_in}")
    rng = np.random.default_rng(rng)
    g = rng.normal(size=(d_out, d_in)) + 1j * rng.normal(size=(d_out, d_in))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_channel(
    d_in: int | None = None,
    d_out: int | None = None,
    rank: int | None = None,
    rng: np.random.Generator | int | None = None,
    in_legs: Sequence | None = None,
    out_legs: Sequence | None = None,
) -> Channel:
    """Random CPTP map: a Haar isometry into ``out ⊗ env`` with the env traced out.

    ``rank`` is the environment dimension (defaults to ``d_in * d_out``, which
    gives a full-rank Choi operator almost surely). When leg lists are given
    they fix the dimensions.
    """
    if in_legs is not None:
        d_in = prod_dims(as_legs(in_legs))
    if out_legs is not None:
        d_out = prod_dims(as_legs(out_legs))
    d_out = d_in if d_out is None else d_out
    rank = d_in * d_out if rank is None else rank
    v = random_isometry(d_in, d_out * rank, rng).reshape(d_out, rank, d_in)
    kraus = [v[:, k, :] for k in range(rank)]
    return choi_from_kraus(kraus, in_legs, out_legs)
