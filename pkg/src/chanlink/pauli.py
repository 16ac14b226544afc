"""The four qubit channel families that are diagonal in the Pauli basis.

In the basis ``sigma_i / sqrt(2)`` each channel is ``diag(1, a1, a2, a3)``:

====  ===================================  ============  ==================
kind  name                                 diagonal      parameter range
====  ===================================  ============  ==================
C     depolarizing                         (p, p, p)     -1/3 <= p <= 1
D     transpose depolarizing               (p, -p, p)    -1 <= p <= 1/3
R     hybrid depolarizing classical        (-p, -p, p)   -1/3 <= p <= 1
S     hybrid transpose depolarizing        (-p, p, p)    -1 <= p <= 1/3
      classical
====  ===================================  ============  ==================

Families are built from their closed-form Choi matrices. All four Choi
matrices are diagonal in the Bell basis, so any two of them commute.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from chanlink.channel import Channel, apply
from chanlink.dilation import Isometry, minimal_dilation
from chanlink.errors import NotCommuting, ParamRange, ShapeError
from chanlink.fidelity import EIGEN_PAIRING, FidelityReport, channel_fidelity
from chanlink.tensor import Leg, hermitian_eig

SIGMA = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)

KINDS = ("C", "D", "R", "S")
NAMES = {
    "C": "depolarizing",
    "D": "transpose depolarizing",
    "R": "hybrid depolarizing classical",
    "S": "hybrid transpose depolarizing classical",
}
RANGES = {
    "C": (Fraction(-1, 3), Fraction(1)),
    "D": (Fraction(-1), Fraction(1, 3)),
    "R": (Fraction(-1, 3), Fraction(1)),
    "S": (Fraction(-1), Fraction(1, 3)),
}
_SIGNS = {"C": (1, 1, 1), "D": (1, -1, 1), "R": (-1, -1, 1), "S": (-1, 1, 1)}

COMMUTE_RTOL = 1e-10


def _check_kind(kind: str) -> str:
    kind = str(kind).upper()
    if kind not in KINDS:
        raise ParamRange(f"unknown family {kind!r}; choose one of {', '.join(KINDS)}")
    return kind


def family_choi(kind: str, p: float) -> np.ndarray:
    """Closed-form 4x4 Choi matrix of a family member. No range check."""
    kind = _check_kind(kind)
    p = float(p)
    hi, lo = (1 + p) / 2, (1 - p) / 2
    j = np.diag([hi, lo, lo, hi]).astype(complex)
    if kind in ("C", "R"):
        corner = p if kind == "C" else -p
        j[0, 3] = j[3, 0] = corner
    else:
        middle = p if kind == "D" else -p
        j[1, 2] = j[2, 1] = middle
    # drop negative zeros so p = 0 serializes identically for every kind
    return j + 0.0


def range_text(kind: str) -> str:
    lo, hi = RANGES[_check_kind(kind)]
    return f"{lo} <= p <= {hi}"


@dataclass(frozen=True)
class PauliDiagonalChannel:
    kind: str
    p: float

    @property
    def diag(self) -> tuple[float, float, float]:
        return tuple(s * self.p + 0.0 for s in _SIGNS[self.kind])

    @property
    def name(self) -> str:
        return NAMES[self.kind]

    @property
    def choi(self) -> np.ndarray:
        return family_choi(self.kind, self.p)

    @property
    def channel(self) -> Channel:
        return Channel((Leg("0", 2),), (Leg("1", 2),), self.choi)


def make_family(kind: str, p: float) -> PauliDiagonalChannel:
    """A member of family ``kind`` (one of ``C, D, R, S``) at parameter ``p``.

    Raises:
        ParamRange: unknown kind or ``p`` outside the family's range.
    """
    kind = _check_kind(kind)
    lo, hi = RANGES[kind]
    if not float(lo) <= float(p) <= float(hi):
        raise ParamRange(f"family {kind} needs {range_text(kind)}, got p={p}")
    return PauliDiagonalChannel(kind, float(p))


def _as_channel(x) -> Channel:
    return x.channel if isinstance(x, PauliDiagonalChannel) else x


def pauli_transfer(c) -> np.ndarray:
    """4x4 real matrix ``T[i, j] = Tr[sigma_i c(sigma_j)] / 2``."""
    c = _as_channel(c)
    if c.d_in != 2 or c.d_out != 2:
        raise ShapeError(f"Pauli transfer needs a qubit channel, got {c.d_in}->{c.d_out}")
    t = np.empty((4, 4))
    for j, sj in enumerate(SIGMA):
        out = apply(c, sj).data
        for i, si in enumerate(SIGMA):
            t[i, j] = np.trace(si @ out).real / 2
    return t


def commutator_gap(m, n) -> float:
    """``max|MN - NM|`` on the Choi matrices, relative to ``max|M| * max|N|``."""
    a, b = _as_channel(m).choi.data, _as_channel(n).choi.data
    if a.shape != b.shape:
        raise ShapeError(f"Choi shapes differ: {a.shape} vs {b.shape}")
    scale = np.max(np.abs(a)) * np.max(np.abs(b))
    if scale == 0:
        return 0.0
    return float(np.max(np.abs(a @ b - b @ a)) / scale)


def commutes(m, n) -> bool:
    return commutator_gap(m, n) <= COMMUTE_RTOL


def _noise_floor(x: np.ndarray) -> np.ndarray:
    top = max(float(np.max(x)), 0.0)
    return np.where(x > len(x) * np.finfo(float).eps * top, x, 0.0)


def simultaneous_spectra(m, n) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Eigenvalues of two commuting Choi matrices paired on a shared eigenbasis.

    Diagonalizes ``M``, then diagonalizes ``N`` inside each degenerate eigenspace
    of ``M``. Returns ``(alpha, beta, basis)``.

    Raises:
        NotCommuting: if ``N`` is not diagonal in the resulting basis.
    """
    a, b = _as_channel(m).choi.data, _as_channel(n).choi.data
    if not commutes(m, n):
        raise NotCommuting(f"Choi operators do not commute (gap {commutator_gap(m, n):.3e})")
    decomp = hermitian_eig(a)
    alpha, u = decomp.eigenvalues, decomp.eigenvectors.copy()
    tol = 1e-9 * max(1.0, float(np.max(np.abs(alpha))))
    start = 0
    while start < len(alpha):
        stop = start + 1
        while stop < len(alpha) and alpha[start] - alpha[stop] <= tol:
            stop += 1
        if stop - start > 1:
            block = u[:, start:stop]
            sub = block.conj().T @ b @ block
            rot = hermitian_eig((sub + sub.conj().T) / 2).eigenvectors
            u[:, start:stop] = block @ rot
        start = stop
    nb = u.conj().T @ b @ u
    off = nb - np.diag(np.diag(nb))
    scale = max(float(np.max(np.abs(b))), 1e-300)
    if np.max(np.abs(off)) > COMMUTE_RTOL * scale:
        raise NotCommuting("no shared eigenbasis found for the two Choi operators")
    return alpha, np.diag(nb).real, u


def eigen_fidelity(m, n) -> FidelityReport:
    """Channel fidelity from paired eigenvalues, ``sum_i sqrt(alpha_i beta_i) / d_in``.

    For qubit channels this is ``(1/2) sum sqrt(alpha_i beta_i)``. Pairing is by
    shared eigenvector, not by sorted order. ``gap_to_cross_check`` compares
    against :func:`~chanlink.fidelity.channel_fidelity`.
    """
    mc, nc = _as_channel(m), _as_channel(n)
    alpha, beta, _ = simultaneous_spectra(mc, nc)
    raw = float(np.sum(np.sqrt(_noise_floor(alpha) * _noise_floor(beta)))) / mc.d_in
    value = min(1.0, max(0.0, raw))
    general = channel_fidelity(mc, nc).value
    return FidelityReport(value, EIGEN_PAIRING, raw, abs(value - general))


def uhlmann_maximizer(m, n) -> tuple[Isometry, Isometry]:
    """The dilations ``(I ⊗ (J^T)^{1/2})(|I>> ⊗ I)`` of both channels, uncompressed.

    Both share the full ``d_out * d_in`` ancilla, so their overlap is defined
    even when the two Choi ranks differ.
    """
    return (
        minimal_dilation(_as_channel(m), compress=False),
        minimal_dilation(_as_channel(n), compress=False),
    )
