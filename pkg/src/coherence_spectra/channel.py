"""Vacuum-preserving channels on the vacuum + single-particle space.

Index 0 of every channel space is the vacuum; indices ``1..d`` are the
single-particle states (an internal degree of freedom of dimension ``d``).

The three functionals computed by :func:`lpc` are

* loss          ``L = <0| Phi(|psi><psi|) |0>``
* preservation  ``P = || P_perp Phi(|psi><0|) |0> ||``
* creation      ``C = || P_perp Phi(|psi><psi|) |0> ||``

and every vacuum-preserving channel satisfies ``L P^2 + C^2 <= L (1 - L)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionError, NotVacuumPreservingError, ValidationError
from .operators import (
    as_matrix,
    as_vector,
    complex_from_pair,
    dagger,
    hermitian_eigensystem,
    matrix_from_json,
    matrix_to_json,
    matrix_unit,
    validate_density_operator,
)

TRACE_TOL = 1e-10
VACUUM_TOL = 1e-10
INEQUALITY_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """Trace-preserving CP map ``x -> sum_i K_i x K_i^H``."""

    dim: int
    kraus_ops: tuple[np.ndarray, ...]

    def __post_init__(self):
        ops = tuple(as_matrix(k, "Kraus operator") for k in self.kraus_ops)
        if not ops:
            raise ValidationError("a channel needs at least one Kraus operator", ["non_empty"])
        for k in ops:
            if k.shape != (self.dim, self.dim):
                raise DimensionError(f"Kraus operator shape {k.shape} != ({self.dim}, {self.dim})")
            k.setflags(write=False)
        object.__setattr__(self, "kraus_ops", ops)
        err = self.trace_preservation_error()
        if err > TRACE_TOL:
            raise ValidationError(
                f"Kraus operators are not trace preserving (max |sum K^H K - I| = {err:.3e})",
                ["trace_preserving"],
            )

    def trace_preservation_error(self) -> float:
        s = sum(dagger(k) @ k for k in self.kraus_ops)
        return float(np.max(np.abs(s - np.eye(self.dim))))

    def __call__(self, x) -> np.ndarray:
        return apply_channel(self, x)

    def __len__(self) -> int:
        return len(self.kraus_ops)

    def to_json(self) -> dict:
        return {"dim": self.dim, "kraus": [matrix_to_json(k) for k in self.kraus_ops]}

    @classmethod
    def from_json(cls, obj) -> "KrausChannel":
        try:
            dim, kraus = int(obj["dim"]), obj["kraus"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError("channel JSON needs dim and kraus", ["format"]) from exc
        if not isinstance(kraus, list):
            raise ValidationError("kraus must be a list of matrices", ["format"])
        return cls(dim, tuple(matrix_from_json(k) for k in kraus))


def identity_channel(dim: int) -> KrausChannel:
    return KrausChannel(dim, (np.eye(dim, dtype=complex),))


def full_loss_channel(dim: int) -> KrausChannel:
    """``Phi(rho) = |0><0| Tr(rho)``: every particle is lost."""
    return KrausChannel(dim, tuple(matrix_unit(0, j, dim) for j in range(dim)))


def apply_channel(ch: KrausChannel, x) -> np.ndarray:
    # x may be non-Hermitian (e.g. |psi><0|); the map is applied linearly.
    x = as_matrix(x)
    if x.shape != (ch.dim, ch.dim):
        raise DimensionError(f"input shape {x.shape} does not match channel dim {ch.dim}")
    return sum(k @ x @ dagger(k) for k in ch.kraus_ops)


def choi_matrix(ch: KrausChannel) -> np.ndarray:
    """``sum_ij |i><j| (x) Phi(|i><j|)``, input factor first."""
    n = ch.dim
    choi = np.zeros((n * n, n * n), dtype=complex)
    for i in range(n):
        for j in range(n):
            choi[i * n:(i + 1) * n, j * n:(j + 1) * n] = apply_channel(ch, matrix_unit(i, j, n))
    return choi


def kraus_from_choi(choi, dim: int, tol: float = 1e-10) -> tuple[np.ndarray, ...]:
    """Kraus operators from the eigendecomposition of a Choi matrix.

    Raises ``ValidationError`` when the Choi matrix has an eigenvalue below
    ``-tol`` (the map is not completely positive).
    """
    choi = as_matrix(choi, "Choi matrix")
    if choi.shape != (dim * dim, dim * dim):
        raise DimensionError(f"Choi matrix shape {choi.shape} does not match dim {dim}")
    evals, evecs = hermitian_eigensystem(choi, tol=max(tol, 1e-10))
    if evals[0] < -tol:
        raise ValidationError(
            f"map is not completely positive (min Choi eigenvalue {evals[0]:.3e})",
            ["completely_positive"],
        )
    ops = []
    for lam, v in zip(evals[::-1], evecs.T[::-1]):
        if lam <= tol:
            break
        # v[i * dim + a] is the amplitude for input i -> output a
        ops.append(np.sqrt(lam) * v.reshape(dim, dim).T)
    return tuple(ops)


def choi_rank(ch: KrausChannel, tol: float = 1e-10) -> int:
    return int(np.sum(np.linalg.eigvalsh(choi_matrix(ch)) > tol))


@dataclass(frozen=True, eq=False)
class LossChannelParams:
    """``(sigma, gamma)`` parametrization of a single-mode loss channel.

    The channel acts as
    ``rho -> |0><0| rho_00 + sigma rho_11 + gamma |0><1| rho_01 + gamma* |1><0| rho_10``.
    """

    sigma: np.ndarray
    gamma: complex

    def __post_init__(self):
        sigma = as_matrix(self.sigma, "sigma")
        if sigma.shape != (2, 2):
            raise DimensionError(f"sigma must be 2x2, got {sigma.shape}")
        sigma.setflags(write=False)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "gamma", complex(self.gamma))

    @property
    def sigma00(self) -> float:
        return float(self.sigma[0, 0].real)

    @property
    def sigma01(self) -> complex:
        return complex(self.sigma[0, 1])

    @property
    def excess_coherence_loss(self) -> float:
        return 1.0 - self.sigma00 - abs(self.gamma) ** 2

    def violations(self, tol: float = 1e-12) -> list[str]:
        bad = [f"sigma:{f}" for f in validate_density_operator(self.sigma, tol=max(tol, 1e-12)).failures]
        if abs(self.gamma) > 1.0 + tol:
            bad.append("|gamma| <= 1")
        s00 = self.sigma00
        if s00 * abs(self.gamma) ** 2 + abs(self.sigma01) ** 2 > s00 * (1.0 - s00) + tol:
            bad.append("sigma00 |gamma|^2 + |sigma01|^2 <= sigma00 (1 - sigma00)")
        return bad

    def to_json(self) -> dict:
        return {"sigma": matrix_to_json(self.sigma), "gamma": [self.gamma.real, self.gamma.imag]}

    @classmethod
    def from_json(cls, obj) -> "LossChannelParams":
        try:
            return cls(matrix_from_json(obj["sigma"]), complex_from_pair(obj["gamma"], "gamma"))
        except (KeyError, TypeError) as exc:
            raise ValidationError("loss params JSON needs sigma and gamma", ["format"]) from exc


def loss_map_choi(p: LossChannelParams) -> np.ndarray:
    """Choi matrix of the map defined by ``(sigma, gamma)``."""
    images = {
        (0, 0): matrix_unit(0, 0, 2),
        (1, 1): p.sigma,
        (0, 1): p.gamma * matrix_unit(0, 1, 2),
        (1, 0): np.conj(p.gamma) * matrix_unit(1, 0, 2),
    }
    choi = np.zeros((4, 4), dtype=complex)
    for (i, j), img in images.items():
        choi[2 * i:2 * i + 2, 2 * j:2 * j + 2] = img
    return choi


def from_loss_params(p: LossChannelParams, tol: float = 1e-12) -> KrausChannel:
    bad = p.violations(tol)
    if bad:
        raise ValidationError("invalid loss channel parameters: " + "; ".join(bad), bad)
    return KrausChannel(2, kraus_from_choi(loss_map_choi(p), 2))


def loss_params_from_channel(ch: KrausChannel) -> LossChannelParams:
    """Read ``(sigma, gamma)`` off a two-dimensional channel."""
    if ch.dim != 2:
        raise DimensionError("loss parameters are defined for dim-2 channels only")
    sigma = apply_channel(ch, matrix_unit(1, 1, 2))
    gamma = apply_channel(ch, matrix_unit(0, 1, 2))[0, 1]
    return LossChannelParams(sigma, gamma)


def beam_splitter_params(theta: float) -> LossChannelParams:
    """Single mode mixed with a vacuum ancilla, transmissivity cos^2(theta)."""
    c, s = np.cos(theta), np.sin(theta)
    return LossChannelParams(np.diag([s * s, c * c]).astype(complex), c)


def random_beam_splitter_params(p: float) -> LossChannelParams:
    """Fully transparent with probability ``p``, fully reflective otherwise."""
    return LossChannelParams(np.diag([1.0 - p, p]).astype(complex), p)


def measure_and_prepare_channel() -> KrausChannel:
    """Vacuum stays vacuum; one particle is replaced by ``(|0> + |1>)/sqrt(2)``."""
    chi = np.array([1.0, 1.0], dtype=complex) / np.sqrt(2.0)
    return KrausChannel(2, (matrix_unit(0, 0, 2), np.outer(chi, [0.0, 1.0])))


def vacuum_deviation(ch: KrausChannel) -> float:
    vac = matrix_unit(0, 0, ch.dim)
    return float(np.max(np.abs(apply_channel(ch, vac) - vac)))


def is_vacuum_preserving(ch: KrausChannel, tol: float = VACUUM_TOL) -> bool:
    return vacuum_deviation(ch) <= tol


@dataclass(frozen=True)
class LpcReport:
    loss: float
    preservation: float
    creation: float
    excess_coherence_loss: float | None
    inequality_slack: float

    def to_json(self) -> dict:
        return {
            "loss": self.loss,
            "preservation": self.preservation,
            "creation": self.creation,
            "excess_coherence_loss": self.excess_coherence_loss,
            "inequality_slack": self.inequality_slack,
        }

    @classmethod
    def from_json(cls, obj) -> "LpcReport":
        ecl = obj.get("excess_coherence_loss")
        return cls(
            float(obj["loss"]),
            float(obj["preservation"]),
            float(obj["creation"]),
            None if ecl is None else float(ecl),
            float(obj["inequality_slack"]),
        )


def check_psi_perp(psi_perp, dim: int, tol: float = 1e-10) -> np.ndarray:
    psi = as_vector(psi_perp, "psi_perp")
    if psi.size != dim:
        raise DimensionError(f"psi_perp has length {psi.size}, expected {dim}")
    bad = []
    if abs(np.linalg.norm(psi) - 1.0) > tol:
        bad.append("normalized")
    if abs(psi[0]) > tol:
        bad.append("orthogonal_to_vacuum")
    if bad:
        raise ValidationError("psi_perp must be a unit vector orthogonal to the vacuum", bad)
    return psi


def coherence_vector(ch: KrausChannel, psi) -> np.ndarray:
    """``P_perp Phi(|psi><0|) |0>`` as a vector (vacuum entry zeroed)."""
    w = apply_channel(ch, np.outer(psi, np.eye(ch.dim)[0]))[:, 0].copy()
    w[0] = 0.0
    return w


def lpc(ch: KrausChannel, psi_perp, tol: float = 1e-10) -> LpcReport:
    """Loss, preservation and creation of ``ch`` for input ``psi_perp``."""
    psi = check_psi_perp(psi_perp, ch.dim, tol)
    dev = vacuum_deviation(ch)
    if dev > tol:
        raise NotVacuumPreservingError(dev)

    out = apply_channel(ch, np.outer(psi, psi.conj()))
    loss_c = out[0, 0]
    if abs(loss_c.imag) > 1e-12:
        raise ValidationError(f"loss has imaginary part {loss_c.imag:.3e}", ["real_loss"])
    loss = float(loss_c.real)
    creation = float(np.linalg.norm(out[1:, 0]))
    preservation = float(np.linalg.norm(coherence_vector(ch, psi)))

    excess = None
    if ch.dim == 2:
        excess = loss_params_from_channel(ch).excess_coherence_loss
    slack = loss * (1.0 - loss) - loss * preservation ** 2 - creation ** 2
    return LpcReport(loss, preservation, creation, excess, slack)


def check_exclusion_inequality(
    report: LpcReport,
    tol: float = INEQUALITY_TOL,
    zero_loss: float = 1e-9,
    zero_loss_creation: float = 1e-4,
) -> bool:
    """``L P^2 + C^2 <= L (1 - L)``, plus ``C == 0`` whenever ``L == 0``."""
    L, P, C = report.loss, report.preservation, report.creation
    if L * P * P + C * C > L * (1.0 - L) + tol:
        return False
    if L <= zero_loss and C > zero_loss_creation:
        return False
    return True


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def _complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def constrained_unitary(first_column, rng: np.random.Generator) -> np.ndarray:
    """Random unitary whose first column is exactly ``first_column``.

    The remaining columns are orthonormalized complex-Gaussian vectors.
    """
    v = as_vector(first_column)
    v = v / np.linalg.norm(v)
    n = v.size
    m = np.empty((n, n), dtype=complex)
    m[:, 0] = v
    m[:, 1:] = _complex_gaussian(rng, (n, n - 1))
    q, r = np.linalg.qr(m)
    diag = np.diag(r)
    q = q * (diag / np.abs(diag))
    q[:, 0] = v
    return q


def random_vacuum_preserving_channel(d: int, anc: int, seed) -> KrausChannel:
    """Random channel from a dilation ``U`` with ``U|0, a> = |0, a0>``.

    The system (``1 + d`` states) is the left tensor factor, the ancilla
    (``anc`` states, initially ``|0>``) the right one.
    """
    if d < 1 or anc < 1:
        raise ValidationError("need d >= 1 and anc >= 1", ["dimensions"])
    rng = _rng(seed)
    dim = 1 + d
    image = np.zeros(dim * anc, dtype=complex)
    image[:anc] = _complex_gaussian(rng, anc)
    u = constrained_unitary(image, rng).reshape(dim, anc, dim, anc)
    return KrausChannel(dim, tuple(u[:, k, :, 0] for k in range(anc)))


def random_psi_perp(d: int, seed) -> np.ndarray:
    rng = _rng(seed)
    psi = np.zeros(1 + d, dtype=complex)
    psi[1:] = _complex_gaussian(rng, d)
    return psi / np.linalg.norm(psi)


def single_particle_state(amplitudes: Sequence[complex]) -> np.ndarray:
    """Embed internal amplitudes into the vacuum + single-particle space."""
    a = as_vector(amplitudes)
    return np.concatenate([[0.0], a / np.linalg.norm(a)]).astype(complex)
