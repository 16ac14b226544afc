"""Dense operators on labeled tensor-product spaces.

An operator lives on an ordered list of legs (labeled tensor factors). Basis
indices are row-major over the legs, so for legs ``(a, b)`` the composite index
is ``i_a * dim_b + i_b``. Every function here is pure; operators are immutable.

Vectorization convention used throughout the package::

    |A>> = (A ⊗ I)|I>> = sum_{mn} A[m, n] |m>|n>   (i.e. ``A.reshape(-1)``)
"""

from __future__ import annotations

import functools
import os
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

from chanlink.errors import (
    BadPermutation,
    LabelCollision,
    NotHermitian,
    NotPSD,
    ShapeError,
    TooLarge,
    UnknownLeg,
)

DEFAULT_MAX_DIM = 4096
MAX_DIM_ENV = "CHANLINK_MAX_DIM"

HERMITIAN_RTOL = 1e-12
PSD_RTOL = 1e-10


def get_max_dim() -> int:
    """Return the side-length guard for dense operators.

    The ``CHANLINK_MAX_DIM`` environment variable overrides the default of 4096.
    """
    raw = os.environ.get(MAX_DIM_ENV)
    if raw is None or raw.strip() == "":
        return DEFAULT_MAX_DIM
    value = int(raw)
    if value < 1:
        raise ValueError(f"{MAX_DIM_ENV} must be a positive integer, got {raw!r}")
    return value


@dataclass(frozen=True)
class Leg:
    label: Hashable
    dim: int

    def __post_init__(self):
        if isinstance(self.dim, bool) or int(self.dim) != self.dim or self.dim < 1:
            raise ShapeError(f"leg {self.label!r} needs a positive integer dim, got {self.dim!r}")
        object.__setattr__(self, "dim", int(self.dim))


def as_legs(legs: Iterable) -> tuple[Leg, ...]:
    """Coerce ``Leg`` objects or ``(label, dim)`` pairs into a tuple of legs."""
    out = []
    for leg in legs:
        out.append(leg if isinstance(leg, Leg) else Leg(*leg))
    return tuple(out)


def _check_distinct(labels: Sequence[Hashable]) -> None:
    seen = set()
    for lab in labels:
        if lab in seen:
            raise LabelCollision(f"leg label {lab!r} appears more than once")
        seen.add(lab)


def prod_dims(legs: Iterable[Leg]) -> int:
    return int(np.prod([leg.dim for leg in legs], dtype=np.int64))


@dataclass(frozen=True, eq=False)
class LabeledOperator:
    """A square complex matrix on the tensor product of ``legs``.

    ``data`` is copied to a read-only complex array on construction.
    """

    legs: tuple[Leg, ...]
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        legs = as_legs(self.legs)
        _check_distinct([leg.label for leg in legs])
        data = np.array(self.data, dtype=complex)
        side = prod_dims(legs)
        if data.shape != (side, side):
            raise ShapeError(
                f"data has shape {data.shape}, legs {[(l.label, l.dim) for l in legs]} need ({side}, {side})"
            )
        data.setflags(write=False)
        object.__setattr__(self, "legs", legs)
        object.__setattr__(self, "data", data)

    @classmethod
    def identity(cls, legs: Iterable) -> "LabeledOperator":
        legs = as_legs(legs)
        return cls(legs, np.eye(prod_dims(legs), dtype=complex))

    @property
    def labels(self) -> tuple:
        return tuple(leg.label for leg in self.legs)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(leg.dim for leg in self.legs)

    @property
    def side(self) -> int:
        return self.data.shape[0]

    def leg(self, label: Hashable) -> Leg:
        for leg in self.legs:
            if leg.label == label:
                return leg
        raise UnknownLeg(f"no leg labeled {label!r} among {self.labels}")

    def relabel(self, mapping: Mapping) -> "LabeledOperator":
        legs = tuple(Leg(mapping.get(leg.label, leg.label), leg.dim) for leg in self.legs)
        return LabeledOperator(legs, self.data)

    def dag(self) -> "LabeledOperator":
        return LabeledOperator(self.legs, self.data.conj().T)

    def hermitian_gap(self) -> float:
        """Largest entry of ``|A - A†|`` relative to the largest entry of ``|A|``."""
        scale = np.max(np.abs(self.data)) if self.data.size else 0.0
        if scale == 0.0:
            return 0.0
        return float(np.max(np.abs(self.data - self.data.conj().T)) / scale)

    def is_hermitian(self, rtol: float = HERMITIAN_RTOL) -> bool:
        return self.hermitian_gap() <= rtol

    def item(self) -> complex:
        """The single entry of an operator with no legs (a full trace)."""
        if self.data.shape != (1, 1):
            raise ShapeError(f"item() needs a 1x1 operator, got {self.data.shape}")
        return complex(self.data[0, 0])

    def __repr__(self):
        legs = ", ".join(f"{leg.label!r}:{leg.dim}" for leg in self.legs)
        return f"LabeledOperator([{legs}])"


def _require_labels(a: LabeledOperator, labels: Iterable[Hashable]) -> list:
    labels = list(labels)
    known = set(a.labels)
    for lab in labels:
        if lab not in known:
            raise UnknownLeg(f"no leg labeled {lab!r} among {a.labels}")
    return labels


def kron(a: LabeledOperator, b: LabeledOperator, max_dim: int | None = None) -> LabeledOperator:
    """Kronecker product with legs ``a.legs + b.legs``.

    Raises:
        LabelCollision: if the two operators share a leg label.
        TooLarge: if the result side length exceeds ``max_dim``.
    """
    _check_distinct(a.labels + b.labels)
    limit = get_max_dim() if max_dim is None else max_dim
    side = a.side * b.side
    if side > limit:
        raise TooLarge(f"kron result side {side} exceeds the dimension guard {limit}")
    return LabeledOperator(a.legs + b.legs, np.kron(a.data, b.data))


def double_ket_identity(d: int) -> np.ndarray:
    """|I>> = sum_n |n>|n> as a length ``d*d`` vector."""
    if d < 1:
        raise ShapeError(f"dimension must be >= 1, got {d}")
    return np.eye(d, dtype=complex).reshape(-1)


def vec(a: np.ndarray) -> np.ndarray:
    """Row-major vectorization, ``|A>> = sum A[m, n] |m>|n>``."""
    return np.asarray(a).reshape(-1)


def unvec(v: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    return np.asarray(v).reshape(shape)


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    """Eigenvalues in descending order with matching eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        u = self.eigenvectors
        return (u * self.eigenvalues) @ u.conj().T


def _fix_phase(u: np.ndarray) -> np.ndarray:
    # first non-negligible component of each column made real positive
    u = u.copy()
    for k in range(u.shape[1]):
        col = u[:, k]
        mags = np.abs(col)
        idx = int(np.argmax(mags > 1e-12 * mags.max()))
        u[:, k] = col * (np.conj(col[idx]) / mags[idx])
    return u


def _compare_vectors(x: np.ndarray, y: np.ndarray, tol: float = 1e-12) -> int:
    for part in (np.real, np.imag):
        diff = part(x) - part(y)
        hits = np.nonzero(np.abs(diff) > tol)[0]
        if hits.size:
            return -1 if diff[hits[0]] > 0 else 1
    return 0


def hermitian_eig(a: LabeledOperator | np.ndarray) -> EigenDecomposition:
    """Deterministic eigendecomposition of a Hermitian operator.

    The input is symmetrized as ``(a + a†)/2`` first. Eigenvalues come out in
    descending order; within a group of (numerically) equal eigenvalues the
    eigenvectors are ordered by their first differing component, larger real
    part first. Each eigenvector is phase-fixed so its first non-negligible
    component is real and positive.

    Raises:
        NotHermitian: if ``max|a - a†| > 1e-12 * max|a|``.
    """
    data = a.data if isinstance(a, LabeledOperator) else np.asarray(a, dtype=complex)
    if data.ndim != 2 or data.shape[0] != data.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {data.shape}")
    scale = np.max(np.abs(data)) if data.size else 0.0
    if scale > 0 and np.max(np.abs(data - data.conj().T)) > HERMITIAN_RTOL * scale:
        raise NotHermitian(
            f"operator is not Hermitian: max|A - A†| = {np.max(np.abs(data - data.conj().T)):.3e}"
        )
    h = (data + data.conj().T) / 2
    w, u = np.linalg.eigh(h)
    order = np.argsort(-w, kind="stable")
    w, u = w[order], _fix_phase(u[:, order])

    tie_tol = 1e-12 * max(1.0, float(np.max(np.abs(w)))) if w.size else 0.0
    start = 0
    perm = list(range(len(w)))
    while start < len(w):
        stop = start + 1
        while stop < len(w) and w[stop - 1] - w[stop] <= tie_tol:
            stop += 1
        if stop - start > 1:
            group = sorted(
                range(start, stop),
                key=functools.cmp_to_key(lambda i, j: _compare_vectors(u[:, i], u[:, j])),
            )
            perm[start:stop] = group
        start = stop
    w, u = w[perm], u[:, perm]
    return EigenDecomposition(w, u)


def _clamped_spectrum(decomp: EigenDecomposition) -> np.ndarray:
    w = decomp.eigenvalues
    if w.size == 0:
        return w
    top = max(float(w[0]), 0.0)
    if w[-1] < -PSD_RTOL * top:
        raise NotPSD(f"smallest eigenvalue {w[-1]:.3e} is below -1e-10 * {top:.3e}")
    # rounding noise at the level of the numerical-rank tolerance counts as zero
    floor = len(w) * np.finfo(float).eps * top
    return np.where(w > floor, w, 0.0)


def psd_sqrt(a: LabeledOperator | np.ndarray) -> LabeledOperator | np.ndarray:
    """Positive square root of a positive-semidefinite operator.

    Eigenvalues in ``[-1e-10 * lambda_max, 0)`` and positive values below the
    numerical-rank floor ``n * eps * lambda_max`` are treated as zero. Returns
    the same type it was given.

    Raises:
        NotPSD: if some eigenvalue is below ``-1e-10 * lambda_max``.
    """
    decomp = hermitian_eig(a)
    root = np.sqrt(_clamped_spectrum(decomp))
    u = decomp.eigenvectors
    s = (u * root) @ u.conj().T
    s = (s + s.conj().T) / 2
    if isinstance(a, LabeledOperator):
        return LabeledOperator(a.legs, s)
    return s


def clamped_eigenvalues(a: LabeledOperator | np.ndarray) -> np.ndarray:
    """Descending eigenvalues of a PSD operator with rounding noise set to zero."""
    return _clamped_spectrum(hermitian_eig(a))


def permute_legs(a: LabeledOperator, order: Sequence[Hashable]) -> LabeledOperator:
    """Reorder the tensor factors of ``a`` to follow ``order``."""
    order = list(order)
    if len(order) != len(a.labels) or set(order) != set(a.labels):
        raise BadPermutation(f"{order} is not a permutation of {list(a.labels)}")
    index = {lab: i for i, lab in enumerate(a.labels)}
    perm = [index[lab] for lab in order]
    n = len(perm)
    if perm == list(range(n)):
        return a
    t = a.data.reshape(a.dims + a.dims).transpose(perm + [p + n for p in perm])
    legs = tuple(a.legs[p] for p in perm)
    return LabeledOperator(legs, t.reshape(a.data.shape))


def partial_trace(a: LabeledOperator, over: Iterable[Hashable]) -> LabeledOperator:
    """Trace out the legs in ``over``; the remaining legs keep their order.

    Tracing every leg gives a 1x1 operator with no legs (see ``item()``).
    """
    over = set(_require_labels(a, over))
    keep = [lab for lab in a.labels if lab not in over]
    gone = [lab for lab in a.labels if lab in over]
    b = permute_legs(a, keep + gone)
    dk = prod_dims(leg for leg in b.legs[: len(keep)])
    dg = prod_dims(leg for leg in b.legs[len(keep):])
    t = b.data.reshape(dk, dg, dk, dg)
    return LabeledOperator(b.legs[: len(keep)], np.trace(t, axis1=1, axis2=3))


def partial_transpose(a: LabeledOperator, over: Iterable[Hashable]) -> LabeledOperator:
    """Transpose the legs in ``over`` (swap their row and column indices)."""
    over = set(_require_labels(a, over))
    n = len(a.legs)
    perm = list(range(2 * n))
    for i, lab in enumerate(a.labels):
        if lab in over:
            perm[i], perm[i + n] = i + n, i
    t = a.data.reshape(a.dims + a.dims).transpose(perm)
    return LabeledOperator(a.legs, t.reshape(a.data.shape))


def embed(a: LabeledOperator, legs: Sequence[Leg], max_dim: int | None = None) -> LabeledOperator:
    """Pad ``a`` with identities so it acts on ``legs`` (in that order)."""
    legs = as_legs(legs)
    missing = [leg for leg in legs if leg.label not in set(a.labels)]
    for leg in legs:
        if leg.label in set(a.labels) and a.leg(leg.label).dim != leg.dim:
            raise ShapeError(f"leg {leg.label!r} has dim {a.leg(leg.label).dim}, expected {leg.dim}")
    out = a
    if missing:
        out = kron(a, LabeledOperator.identity(missing), max_dim=max_dim)
    return permute_legs(out, [leg.label for leg in legs])


def permute_tensor_axes(
    mat: np.ndarray, dims: Sequence[int], perm: Sequence[int], axis: int = 0
) -> np.ndarray:
    """Permute the tensor factors along one axis of a (possibly rectangular) matrix.

    ``dims`` factor ``mat.shape[axis]`` row-major; ``perm[k]`` names the source
    factor that lands in position ``k``.
    """
    dims = list(dims)
    perm = list(perm)
    if axis == 0:
        t = mat.reshape(dims + [mat.shape[1]]).transpose(perm + [len(dims)])
        return t.reshape(mat.shape)
    t = mat.reshape([mat.shape[0]] + dims).transpose([0] + [p + 1 for p in perm])
    return t.reshape(mat.shape)
