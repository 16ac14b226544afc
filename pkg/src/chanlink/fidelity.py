"""Fidelity of states and channels, and the decay of n-fold self-link fidelity."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from chanlink.channel import Channel
from chanlink.dilation import Isometry
from chanlink.errors import BadEpsilon, NotUnitTrace, ShapeError
from chanlink.link import self_link_power
from chanlink.tensor import LabeledOperator, get_max_dim, psd_sqrt

TRACE_TOL = 1e-9
DEFAULT_CHECK_DIM = 256

GENERAL = "general"
EIGEN_PAIRING = "eigen_pairing"
UHLMANN_OVERLAP = "uhlmann_overlap"


@dataclass(frozen=True)
class FidelityReport:
    """A fidelity value clamped to ``[0, 1]``; ``raw`` keeps the unclamped number."""

    value: float
    method: str
    raw: float
    gap_to_cross_check: float | None = None


def _clamp(x: float) -> float:
    return min(1.0, max(0.0, x))


def _matrix(x) -> np.ndarray:
    return x.data if isinstance(x, LabeledOperator) else np.asarray(x, dtype=complex)


def _raw_fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    # Tr sqrt(sqrt(rho) sigma sqrt(rho)) is the trace norm of sqrt(rho) sqrt(sigma);
    # singular values avoid square-rooting rounding noise in null directions
    product = psd_sqrt(rho) @ psd_sqrt(sigma)
    return float(np.sum(np.linalg.svd(product, compute_uv=False)))


def state_fidelity(rho, sigma) -> float:
    """Root fidelity ``Tr sqrt(sqrt(rho) sigma sqrt(rho))`` of two density operators.

    Raises:
        NotPSD: either input has a clearly negative eigenvalue.
        NotUnitTrace: either trace is off from 1 by more than 1e-9.
    """
    a, b = _matrix(rho), _matrix(sigma)
    if a.shape != b.shape:
        raise ShapeError(f"state shapes differ: {a.shape} vs {b.shape}")
    for name, x in (("rho", a), ("sigma", b)):
        tr = np.trace(x)
        if abs(tr - 1) > TRACE_TOL:
            raise NotUnitTrace(f"{name} has trace {tr.real:.12g}, expected 1")
    if np.array_equal(a, b):
        return 1.0
    return _clamp(_raw_fidelity(a, b))


def _check_same_shape(m: Channel, n: Channel) -> None:
    if (m.d_in, m.d_out) != (n.d_in, n.d_out):
        raise ShapeError(
            f"channels act between different spaces: {m.d_in}->{m.d_out} vs {n.d_in}->{n.d_out}"
        )


def channel_fidelity(m: Channel, n: Channel) -> FidelityReport:
    """Fidelity of the normalized Choi states ``J_m / d_in`` and ``J_n / d_in``.

    Identical Choi operators give exactly 1 rather than 1 minus rounding.
    """
    _check_same_shape(m, n)
    if np.array_equal(m.choi.data, n.choi.data):
        return FidelityReport(1.0, GENERAL, 1.0)
    d = m.d_in
    raw = _raw_fidelity(m.choi.data / d, n.choi.data / d)
    return FidelityReport(_clamp(raw), GENERAL, raw)


@dataclass(frozen=True)
class SweepResult:
    """Fidelity of ``n``-fold self-links for ``n = 1..n_max``.

    ``rows`` hold the closed form ``fid1**n``. ``checks`` hold the fidelity
    computed directly on the self-linked Choi operators for every ``n`` small
    enough to build densely, and ``max_discrepancy`` is the largest gap between
    the two. ``n_tilde`` is ``floor(log(epsilon) / log(fid1))``, or -1 when the
    fidelity never drops below ``epsilon`` (``fid1 == 1``).
    """

    fid1: float
    rows: list[tuple[int, float]]
    epsilon: float
    n_tilde: int
    checks: list[tuple[int, float]] = field(default_factory=list)
    max_discrepancy: float = 0.0


def threshold_index(fid1: float, epsilon: float) -> int:
    """Smallest ``N`` with ``fid1**n < epsilon`` for all ``n > N``; -1 if none exists."""
    if not 0.0 < epsilon < 1.0:
        raise BadEpsilon(f"epsilon must lie in (0, 1), got {epsilon}")
    if fid1 >= 1.0:
        return -1
    if fid1 <= 0.0:
        return 0
    k = math.floor(math.log(epsilon) / math.log(fid1))
    # guard against the log ratio rounding just below an integer
    while fid1 ** (k + 1) >= epsilon:
        k += 1
    return k


def discrimination_sweep(
    m: Channel,
    n: Channel,
    n_max: int,
    epsilon: float,
    check_max_dim: int = DEFAULT_CHECK_DIM,
) -> SweepResult:
    """Tabulate ``F(m^{⋆k}, n^{⋆k}) = F(m, n)**k`` for ``k = 1..n_max``.

    The power law is also checked by building both self-linked channels and
    computing their fidelity directly, for each ``k`` whose Choi side stays
    within ``min(check_max_dim, dimension guard)``.
    """
    if not 0.0 < epsilon < 1.0:
        raise BadEpsilon(f"epsilon must lie in (0, 1), got {epsilon}")
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    fid1 = channel_fidelity(m, n).value
    rows = [(k, fid1**k) for k in range(1, n_max + 1)]

    limit = min(check_max_dim, get_max_dim())
    checks = []
    for k in range(1, n_max + 1):
        if (m.d_out * m.d_in) ** k > limit:
            break
        direct = channel_fidelity(self_link_power(m, k), self_link_power(n, k)).value
        checks.append((k, direct))
    gap = max((abs(v - fid1**k) for k, v in checks), default=0.0)
    return SweepResult(fid1, rows, epsilon, threshold_index(fid1, epsilon), checks, gap)


def uhlmann_overlap(v: Isometry, w: Isometry, n_power: int = 1) -> float:
    """``(|Tr(V† W)| / d_in) ** n_power`` for two dilations on the same spaces."""
    if (v.d_in, v.d_out, v.d_anc) != (w.d_in, w.d_out, w.d_anc):
        raise ShapeError(
            f"isometries differ in shape: {(v.d_in, v.d_out, v.d_anc)} vs {(w.d_in, w.d_out, w.d_anc)}"
        )
    overlap = abs(np.trace(v.v.conj().T @ w.v)) / v.d_in
    return float(overlap**n_power)
