"""Channels that linear optics induces on the vacuum + single-particle sector.

A passive mode transformation is a unitary ``(K+J) x (K+J)`` matrix ``S``
acting on ``K`` system modes followed by ``J`` ancilla modes. With the
ancilla in a compatible state the system channel depends only on the
system block ``S11`` and reads

    Phi(rho) = |0><0| Tr[(1 - S^H S) rho] + S rho S^H + S rho |0><0| + |0><0| rho S^H
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from .channel import KrausChannel
from .errors import DimensionError, VacuumCompatibilityError, ValidationError
from .operators import (
    as_matrix,
    as_vector,
    complex_from_pair,
    dagger,
    matrix_from_json,
    matrix_to_json,
    operator_norm,
    svd,
)

UNITARY_TOL = 1e-10
CONTRACTION_TOL = 1e-12
SINGULAR_TOL = 1e-10
ANNIHILATION_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class ModeUnitary:
    K: int
    J: int
    S: np.ndarray

    def __post_init__(self):
        S = as_matrix(self.S, "S")
        n = self.K + self.J
        if self.K < 1 or self.J < 0 or S.shape != (n, n):
            raise DimensionError(f"S must be {n}x{n} for K={self.K}, J={self.J}")
        err = float(np.max(np.abs(dagger(S) @ S - np.eye(n))))
        if err > UNITARY_TOL:
            raise ValidationError(f"mode matrix is not unitary (error {err:.3e})", ["unitary"])
        S.setflags(write=False)
        object.__setattr__(self, "S", S)

    @property
    def S11(self) -> np.ndarray:
        return self.S[: self.K, : self.K]

    @property
    def S12(self) -> np.ndarray:
        return self.S[: self.K, self.K:]

    @property
    def S21(self) -> np.ndarray:
        return self.S[self.K:, : self.K]

    @property
    def S22(self) -> np.ndarray:
        return self.S[self.K:, self.K:]

    def to_json(self) -> dict:
        return {"K": self.K, "J": self.J, "S": matrix_to_json(self.S)}

    @classmethod
    def from_json(cls, obj) -> "ModeUnitary":
        try:
            return cls(int(obj["K"]), int(obj["J"]), matrix_from_json(obj["S"]))
        except (KeyError, TypeError) as exc:
            raise ValidationError("mode unitary JSON needs K, J and S", ["format"]) from exc


@dataclass(frozen=True, eq=False)
class AncillaState:
    """Pure ancilla state over occupations ``{0,1}^J``, mode 1 most significant."""

    J: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = as_vector(self.amplitudes, "ancilla amplitudes")
        if amps.size != 2 ** self.J:
            raise DimensionError(f"ancilla state needs {2 ** self.J} amplitudes, got {amps.size}")
        if abs(np.linalg.norm(amps) - 1.0) > 1e-10:
            raise ValidationError("ancilla state must have unit norm", ["normalized"])
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def vacuum(cls, J: int) -> "AncillaState":
        amps = np.zeros(2 ** J, dtype=complex)
        amps[0] = 1.0
        return cls(J, amps)

    @classmethod
    def occupation(cls, occupations) -> "AncillaState":
        """Fock state with the given 0/1 occupation per mode."""
        occ = [int(n) for n in occupations]
        if any(n not in (0, 1) for n in occ):
            raise ValidationError("occupations must be 0 or 1", ["truncation"])
        idx = int("".join(map(str, occ)) or "0", 2)
        amps = np.zeros(2 ** len(occ), dtype=complex)
        amps[idx] = 1.0
        return cls(len(occ), amps)

    def to_json(self) -> dict:
        return {"J": self.J, "amplitudes": [[float(z.real), float(z.imag)] for z in self.amplitudes]}

    @classmethod
    def from_json(cls, obj) -> "AncillaState":
        try:
            amps = [complex_from_pair(a, "amplitude") for a in obj["amplitudes"]]
            return cls(int(obj["J"]), np.array(amps, dtype=complex))
        except (KeyError, TypeError) as exc:
            raise ValidationError("ancilla JSON needs J and amplitudes", ["format"]) from exc


def beam_splitter(theta: float) -> ModeUnitary:
    c, s = np.cos(theta), np.sin(theta)
    return ModeUnitary(1, 1, np.array([[c, s], [-s, c]], dtype=complex))


def random_mode_unitary(K: int, J: int, rng: np.random.Generator) -> ModeUnitary:
    n = K + J
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    diag = np.diag(r)
    return ModeUnitary(K, J, q * (diag / np.abs(diag)))


def annihilators(J: int) -> list[np.ndarray]:
    """Truncated bosonic lowering operators on ``{0,1}^J`` (no sign strings)."""
    lower = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
    eye = np.eye(2, dtype=complex)
    ops = []
    for j in range(J):
        factors = [lower if m == j else eye for m in range(J)]
        ops.append(reduce(np.kron, factors, np.eye(1, dtype=complex)))
    return ops


@dataclass(frozen=True)
class VacuumTest:
    passed: bool
    offending_modes: tuple[int, ...]
    singular_values: tuple[float, ...]

    def __bool__(self) -> bool:
        return self.passed


def vacuum_preservation_test(mu: ModeUnitary, eta: AncillaState) -> VacuumTest:
    """Check ``d_k bbar_k |eta> = 0`` for the SVD modes of ``S12``.

    Offending modes are reported 1-based, in order of decreasing ``d_k``.
    """
    if eta.J != mu.J:
        raise DimensionError(f"ancilla has {eta.J} modes, mode matrix expects {mu.J}")
    if mu.J == 0:
        return VacuumTest(True, (), ())
    _, d, W = svd(mu.S12)
    b = annihilators(mu.J)
    wh = dagger(W)
    offending = []
    for k, dk in enumerate(d):
        if dk <= SINGULAR_TOL:
            continue
        bbar = sum(wh[k, j] * b[j] for j in range(mu.J))
        if np.linalg.norm(bbar @ eta.amplitudes) > ANNIHILATION_TOL:
            offending.append(k + 1)
    return VacuumTest(not offending, tuple(offending), tuple(float(x) for x in d))


def is_linear_optics_contraction(s_op, tol: float = 1e-10) -> bool:
    """``S S^H <= 1`` and ``S^H S <= 1`` on the single-particle block."""
    s_op = as_matrix(s_op)
    k = s_op.shape[0]
    lo1 = np.linalg.eigvalsh(np.eye(k) - s_op @ dagger(s_op))[0]
    lo2 = np.linalg.eigvalsh(np.eye(k) - dagger(s_op) @ s_op)[0]
    return bool(min(lo1, lo2) >= -tol)


def contraction_channel_action(s_op, rho) -> np.ndarray:
    """Direct evaluation of the linear-optics channel formula (no Kraus form)."""
    s_op = as_matrix(s_op)
    n = s_op.shape[0] + 1
    s = np.zeros((n, n), dtype=complex)
    s[1:, 1:] = s_op
    vac = np.zeros((n, n), dtype=complex)
    vac[0, 0] = 1.0
    rho = as_matrix(rho)
    return (
        vac * np.trace((np.eye(n) - dagger(s) @ s) @ rho)
        + s @ rho @ dagger(s)
        + s @ rho @ vac
        + vac @ rho @ dagger(s)
    )


def from_contraction(s_op, tol: float = CONTRACTION_TOL) -> KrausChannel:
    """Channel on ``1 + K`` states built from a ``K x K`` contraction.

    Kraus form: ``|0><0| + S`` plus ``sqrt(lambda_j) |0><v_j|`` for the
    eigenpairs of ``1 - S^H S``.
    """
    s_op = as_matrix(s_op, "S")
    if s_op.shape[0] != s_op.shape[1]:
        raise DimensionError("contraction must be square")
    norm = operator_norm(s_op)
    if norm > 1.0 + tol:
        raise ValidationError(
            f"largest singular value {norm:.12g} exceeds 1: map is not completely positive",
            ["contraction"],
        )
    k = s_op.shape[0]
    n = k + 1
    k0 = np.zeros((n, n), dtype=complex)
    k0[0, 0] = 1.0
    k0[1:, 1:] = s_op
    ops = [k0]
    lam, vecs = np.linalg.eigh(np.eye(k) - dagger(s_op) @ s_op)
    for l, v in zip(lam, vecs.T):
        if l <= 1e-15:
            continue
        op = np.zeros((n, n), dtype=complex)
        op[0, 1:] = np.sqrt(l) * v.conj()
        ops.append(op)
    return KrausChannel(n, tuple(ops))


def induced_channel(mu: ModeUnitary, eta: AncillaState | None = None) -> KrausChannel:
    """Channel on the system's vacuum + single-particle sector."""
    eta = AncillaState.vacuum(mu.J) if eta is None else eta
    test = vacuum_preservation_test(mu, eta)
    if not test:
        raise VacuumCompatibilityError(list(test.offending_modes))
    return from_contraction(mu.S11)


def convex_mixture(channels, weights) -> KrausChannel:
    channels = list(channels)
    w = np.asarray(weights, dtype=float).reshape(-1)
    if not channels or len(channels) != w.size:
        raise ValidationError("need one weight per channel", ["weights"])
    if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
        raise ValidationError("weights must be a probability vector", ["weights"])
    dim = channels[0].dim
    if any(ch.dim != dim for ch in channels):
        raise DimensionError("all channels must share a dimension")
    ops = tuple(np.sqrt(wi) * k for wi, ch in zip(w, channels) if wi > 0 for k in ch.kraus_ops)
    return KrausChannel(dim, ops)
