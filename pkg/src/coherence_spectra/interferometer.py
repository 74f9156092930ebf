"""Mach-Zehnder interferometry with a lossy device in path A.

The two paths are modelled on ``(1+d) (x) (1+d)``: the left factor is path A,
the right factor path B, index 0 of each factor is "no particle in this
path". A single particle enters, so only ``|k,0>``, ``|0,k>`` and the
lost-particle state ``|0,0>`` are ever populated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import (
    KrausChannel,
    apply_channel,
    check_psi_perp,
    coherence_vector,
    constrained_unitary,
    vacuum_deviation,
)
from .errors import DimensionError, NotVacuumPreservingError, PhysicsError, ValidationError
from .operators import as_matrix, dagger

UNITARY_TOL = 1e-10


def _check_unitary(u: np.ndarray, d: int) -> np.ndarray:
    u = as_matrix(u, "U")
    if u.shape != (d, d):
        raise DimensionError(f"U must be {d}x{d}, got {u.shape}")
    err = float(np.max(np.abs(dagger(u) @ u - np.eye(d))))
    if err > UNITARY_TOL:
        raise ValidationError(f"U is not unitary (error {err:.3e})", ["unitary"])
    return u


def splitter(dim: int) -> np.ndarray:
    """50/50 splitter on the two-path space.

    ``|k,0> -> (|k,0> + |0,k>)/sqrt2`` and ``|0,k> -> (|k,0> - |0,k>)/sqrt2``;
    the empty state and the (unpopulated) two-particle states are left alone.
    """
    n = dim * dim
    bs = np.eye(n, dtype=complex)
    h = np.sqrt(0.5)
    for k in range(1, dim):
        a, b = k * dim, k
        bs[a, a], bs[a, b] = h, h
        bs[b, a], bs[b, b] = h, -h
    return bs


def simulate_mach_zehnder(
    ch: KrausChannel, psi_perp, u, chi: float, tol: float = 1e-10
) -> float:
    """Probability to detect the particle in path A, by full simulation."""
    dim = ch.dim
    psi = check_psi_perp(psi_perp, dim, tol)
    u = _check_unitary(u, dim - 1)
    dev = vacuum_deviation(ch)
    if dev > tol:
        raise NotVacuumPreservingError(dev)

    bs = splitter(dim)
    state = bs @ np.kron(psi, np.eye(dim)[0])
    rho = np.outer(state, state.conj())

    path_b = np.eye(dim, dtype=complex)
    path_b[1:, 1:] = np.exp(1j * chi) * u
    rho = sum(np.kron(k, path_b) @ rho @ dagger(np.kron(k, path_b)) for k in ch.kraus_ops)
    rho = bs @ rho @ dagger(bs)

    pops = np.real(np.diag(rho)).reshape(dim, dim)
    gain = float(pops[1:, 1:].sum())
    if gain > tol:
        raise PhysicsError(f"two-particle population {gain:.3e}: channel has gain")
    return float(pops[1:, 0].sum())


def coherence_overlap(ch: KrausChannel, psi_perp, u) -> complex:
    """``F = <psi| U^H Phi(|psi><0|) |0>`` (``U`` acts on the internal space)."""
    psi = np.asarray(psi_perp, dtype=complex).reshape(-1)
    w = coherence_vector(ch, psi)
    return complex(np.vdot(u @ psi[1:], w[1:]))


def closed_form_p_a(ch: KrausChannel, psi_perp, u, chi: float) -> float:
    psi = np.asarray(psi_perp, dtype=complex).reshape(-1)
    loss = float(np.real(apply_channel(ch, np.outer(psi, psi.conj()))[0, 0]))
    f = coherence_overlap(ch, psi, u)
    return 0.5 - 0.25 * loss + 0.5 * abs(f) * np.cos(np.angle(f) - chi)


@dataclass(frozen=True)
class Fringe:
    chi: np.ndarray
    p_a: np.ndarray
    offset: float
    visibility: float
    best_phase: float


def chi_grid(n_chi: int) -> np.ndarray:
    return 2.0 * np.pi * np.arange(n_chi) / n_chi


def fringe(ch: KrausChannel, psi_perp, u, n_chi: int = 64) -> Fringe:
    """Sample ``p_A`` on a uniform phase grid and fit ``a + b cos(chi - phi)``.

    ``visibility`` is half the peak-to-peak amplitude of the fitted fringe.
    """
    if n_chi < 3:
        raise ValidationError("need at least 3 phase samples", ["n_chi"])
    chi = chi_grid(n_chi)
    p = np.array([simulate_mach_zehnder(ch, psi_perp, u, c) for c in chi])
    c1 = 2.0 * np.mean(p * np.exp(1j * chi))
    return Fringe(chi, p, float(np.mean(p)), float(abs(c1)), float(np.angle(c1) % (2 * np.pi)))


def analytic_maximizer(ch: KrausChannel, psi_perp) -> np.ndarray:
    """Unitary mapping the internal part of ``psi`` onto the coherence vector."""
    psi = np.asarray(psi_perp, dtype=complex).reshape(-1)
    d = ch.dim - 1
    w = coherence_vector(ch, psi)[1:]
    if np.linalg.norm(w) < 1e-14:
        return np.eye(d, dtype=complex)
    rng = np.random.default_rng(0)
    a = constrained_unitary(psi[1:], rng)
    b = constrained_unitary(w, rng)
    return b @ dagger(a)


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    if d == 1:
        return np.array([[np.exp(2j * np.pi * rng.random())]])
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(z)
    diag = np.diag(r)
    return q * (diag / np.abs(diag))


def max_visibility_scan(
    ch: KrausChannel,
    psi_perp,
    n_u: int,
    n_chi: int,
    seed: int = 0,
    include_analytic: bool = True,
) -> tuple[float, np.ndarray]:
    """Best fringe visibility over random (and optionally the optimal) ``U``."""
    rng = np.random.default_rng(seed)
    d = ch.dim - 1
    candidates = [random_unitary(d, rng) for _ in range(n_u)]
    if include_analytic:
        candidates.insert(0, analytic_maximizer(ch, psi_perp))
    if not candidates:
        raise ValidationError("no unitaries to scan", ["n_u"])
    best_vis, best_u = -1.0, candidates[0]
    for u in candidates:
        vis = fringe(ch, psi_perp, u, n_chi).visibility
        if vis > best_vis:
            best_vis, best_u = vis, u
    return best_vis, best_u
