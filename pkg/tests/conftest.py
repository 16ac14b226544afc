"""Shared fixtures and independent oracles.

The oracles here work on raw Kraus lists and plain numpy so they never route
through the library code they check.
"""

import numpy as np
import pytest

from chanlink import choi_from_kraus

_ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(20241015)


def haar_kraus(d_in, d_out, k, rng):
    """Kraus list from a Haar isometry C^d_in -> C^d_out ⊗ C^k."""
    g = rng.normal(size=(d_out * k, d_in)) + 1j * rng.normal(size=(d_out * k, d_in))
    q, r = np.linalg.qr(g)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    v = q.reshape(d_out, k, d_in)
    return [v[:, j, :] for j in range(k)]


def kraus_channel(kraus, in_legs=None, out_legs=None):
    return choi_from_kraus(kraus, in_legs, out_legs)


def kraus_apply(kraus, x):
    return sum(a @ x @ a.conj().T for a in kraus)


def choi_by_definition(apply_fn, d_in):
    """Choi operator straight from (M ⊗ id)(|I>><<I|) = sum_ij M(|i><j|) ⊗ |i><j|."""
    blocks = None
    for i in range(d_in):
        for j in range(d_in):
            e = np.zeros((d_in, d_in), dtype=complex)
            e[i, j] = 1
            term = np.kron(apply_fn(e), e)
            blocks = term if blocks is None else blocks + term
    return blocks


def matrix_units(d):
    units = []
    for i in range(d):
        for j in range(d):
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = 1
            units.append(e)
    return units


def random_density(d, rng):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = g @ g.conj().T
    return rho / np.trace(rho)


@pytest.fixture
def record_criterion():
    def record(name, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def _eigh_sqrt(a):
    w, u = np.linalg.eigh((a + a.conj().T) / 2)
    return (u * np.sqrt(np.clip(w, 0, None))) @ u.conj().T


def fidelity_oracle(rho, sigma):
    """Tr sqrt(sqrt(rho) sigma sqrt(rho)) taken literally with two eigh square roots."""
    s = _eigh_sqrt(rho)
    return float(np.trace(_eigh_sqrt(s @ sigma @ s)).real)
