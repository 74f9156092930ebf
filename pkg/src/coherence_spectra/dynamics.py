"""Open dynamics of a photon mode coupled to a two- or three-level atom.

Joint states live on ``photon (x) atom`` with the photon factor first; both
factors use ``|0>`` for empty / ground. ``sigma_z`` is ``+1`` on the occupied
or excited state, so the detuning ``omega - omega_a`` is the energy gap
between ``|1,g>`` and ``|0,e>``.

Density matrices are vectorized row-major (``vec(rho)[i*n + j] = rho[i, j]``),
so ``vec(A rho B) = (A kron B^T) vec(rho)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from .channel import LossChannelParams
from .errors import DimensionError, PhysicsError, ValidationError
from .operators import as_matrix, dagger, hermitian_eigensystem, hermiticity_error, partial_trace

DEFAULT_DT = 0.01
TRACE_ABORT = 1e-6


class Dissipator(str, enum.Enum):
    NONE = "none"
    RELAXATION = "relaxation"
    DEPHASING = "dephasing"


@dataclass(frozen=True)
class JcConfig:
    """Photon mode + two-level atom (energies in units of the reference energy)."""

    omega: float = 1.0
    omega_a: float = 1.0
    g: float = 0.1
    q: float = 0.0
    dissipator: Dissipator = Dissipator.NONE

    kind = "jc"
    atom_dim = 2

    def __post_init__(self):
        object.__setattr__(self, "dissipator", Dissipator(self.dissipator))
        if self.g < 0 or self.q < 0:
            raise ValidationError("g and q must be non-negative", ["g >= 0", "q >= 0"])

    def hamiltonian(self) -> np.ndarray:
        return jc_hamiltonian(self)

    def liouvillian(self) -> np.ndarray:
        return liouvillian(self.hamiltonian(), self.q, self.dissipator, atom_dim=2)


@dataclass(frozen=True)
class ThreeLevelConfig:
    """Photon mode + three-level atom, closed dynamics."""

    omega: float = 2.0
    omega0: float = 5.0
    omega1: float = 7.0
    omega2: float = 8.0
    g01: float = 0.05
    g02: float = 0.07
    g12: float = 0.08

    kind = "three-level"
    atom_dim = 3

    def __post_init__(self):
        if min(self.g01, self.g02, self.g12) < 0:
            raise ValidationError("couplings must be non-negative", ["couplings >= 0"])

    def hamiltonian(self) -> np.ndarray:
        return three_level_hamiltonian(self)

    def liouvillian(self) -> np.ndarray:
        return liouvillian(self.hamiltonian(), 0.0, Dissipator.NONE, atom_dim=3)


Model = JcConfig | ThreeLevelConfig


def model_to_json(model: Model) -> dict:
    out = {"type": model.kind}
    for k, v in asdict(model).items():
        out[k] = v.value if isinstance(v, Dissipator) else v
    return out


def model_from_json(obj: dict) -> Model:
    """Build a model config; ``type`` is optional and inferred from the fields."""
    if not isinstance(obj, dict):
        raise ValidationError("model config must be a JSON object", ["format"])
    obj = {k: v for k, v in obj.items() if k != "integration"}
    kind = obj.pop("type", None)
    if kind is None:
        kind = "three-level" if any(k in obj for k in ("omega0", "g01")) else "jc"
    cls = {"jc": JcConfig, "three-level": ThreeLevelConfig, "three_level": ThreeLevelConfig}.get(kind)
    if cls is None:
        raise ValidationError(f"unknown model type {kind!r}", ["type"])
    allowed = {f.name for f in fields(cls)}
    unknown = set(obj) - allowed
    if unknown:
        raise ValidationError(f"unknown {kind} fields: {sorted(unknown)}", ["fields"])
    try:
        return cls(**obj)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"bad {kind} config: {exc}", ["fields"]) from exc


SIGMA_Z = np.diag([-1.0, 1.0]).astype(complex)


def jc_hamiltonian(cfg: JcConfig) -> np.ndarray:
    """4x4 Hamiltonian on ``|0g>, |0e>, |1g>, |1e>``."""
    eye = np.eye(2)
    h = 0.5 * cfg.omega * np.kron(SIGMA_Z, eye) + 0.5 * cfg.omega_a * np.kron(eye, SIGMA_Z)
    h[1, 2] += cfg.g  # |0e> <-> |1g>
    h[2, 1] += cfg.g
    return h


def three_level_hamiltonian(cfg: ThreeLevelConfig) -> np.ndarray:
    """6x6 Hamiltonian on ``{|0>,|1>}_photon (x) {|0>,|1>,|2>}_atom``."""
    h = 0.5 * cfg.omega * np.kron(SIGMA_Z, np.eye(3))
    h += np.kron(np.eye(2), np.diag([cfg.omega0, cfg.omega1, cfg.omega2]))
    # photon absorbed while the atom goes k' -> k, for k > k'
    for k, kp, g in ((1, 0, cfg.g01), (2, 0, cfg.g02), (2, 1, cfg.g12)):
        lo, hi = 0 * 3 + k, 1 * 3 + kp
        h[lo, hi] += g
        h[hi, lo] += g
    return h.astype(complex)


def _atom_ops(n: int, atom_dim: int) -> tuple[np.ndarray, np.ndarray]:
    if atom_dim != 2 or n % atom_dim:
        raise DimensionError("dissipators are defined for a two-level atom factor")
    eye = np.eye(n // atom_dim)
    lower = np.kron(eye, np.array([[0.0, 1.0], [0.0, 0.0]]))
    sz = np.kron(eye, SIGMA_Z)
    return lower.astype(complex), sz.astype(complex)


def lindblad_rhs(h, q: float, dissipator, rho, atom_dim: int = 2) -> np.ndarray:
    """``-i[H, rho] + q Q(rho)``.

    Relaxation uses ``L rho L^H - {L^H L, rho}/2`` with ``L = |g><e|`` on the
    atom; dephasing is ``-[sz, [sz, rho]]/4``.
    """
    h, rho = as_matrix(h, "H"), as_matrix(rho, "rho")
    if h.shape != rho.shape or h.shape[0] != h.shape[1]:
        raise DimensionError(f"H {h.shape} and rho {rho.shape} must be equal square shapes")
    out = -1j * (h @ rho - rho @ h)
    dissipator = Dissipator(dissipator)
    if q == 0 or dissipator is Dissipator.NONE:
        return out
    lower, sz = _atom_ops(h.shape[0], atom_dim)
    if dissipator is Dissipator.RELAXATION:
        ldl = dagger(lower) @ lower
        out += q * (lower @ rho @ dagger(lower) - 0.5 * (ldl @ rho + rho @ ldl))
    else:
        inner = sz @ rho - rho @ sz
        out += -0.25 * q * (sz @ inner - inner @ sz)
    return out


def liouvillian(h, q: float, dissipator, atom_dim: int = 2) -> np.ndarray:
    """Superoperator matrix of :func:`lindblad_rhs` in row-major vec form."""
    h = as_matrix(h, "H")
    n = h.shape[0]
    eye = np.eye(n)
    sup = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    dissipator = Dissipator(dissipator)
    if q == 0 or dissipator is Dissipator.NONE:
        return sup
    lower, sz = _atom_ops(n, atom_dim)
    if dissipator is Dissipator.RELAXATION:
        ldl = dagger(lower) @ lower
        sup = sup + q * (np.kron(lower, lower.conj()) - 0.5 * (np.kron(ldl, eye) + np.kron(eye, ldl.T)))
    else:
        sz2 = sz @ sz
        sup = sup - 0.25 * q * (np.kron(sz2, eye) - 2 * np.kron(sz, sz.T) + np.kron(eye, sz2.T))
    return sup


def rk4_step(f, y, h: float):
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4_propagator(sup: np.ndarray, h: float) -> np.ndarray:
    """One classical RK4 step of ``dv/dt = sup @ v``, as a matrix.

    The ODE is linear and autonomous, so applying the RK4 stages to the
    identity gives exactly the map each step performs.
    """
    return rk4_step(lambda y: sup @ y, np.eye(sup.shape[0], dtype=complex), h)


@dataclass(frozen=True)
class EvolutionResult:
    times: list[float]
    states: list[np.ndarray]
    trace_drift: float


def _step_plan(t_final: float, dt: float) -> tuple[int, float]:
    """Number of full steps and the length of the final partial step."""
    if dt <= 0 or t_final < 0:
        raise ValidationError("need dt > 0 and t_final >= 0", ["dt > 0", "t_final >= 0"])
    ratio = t_final / dt
    n = round(ratio)
    if abs(ratio - n) <= 1e-9 * max(1.0, ratio):
        return int(n), 0.0
    n = math.floor(ratio)
    return n, t_final - n * dt


def hermitian_basis(n: int) -> np.ndarray:
    """Orthonormal basis of n x n Hermitian matrices, as vec columns.

    Real coordinates in this basis always map back to exactly Hermitian
    matrices, since each off-diagonal pair is built from the same products.
    """
    cols = []
    for i in range(n):
        e = np.zeros((n, n), dtype=complex)
        e[i, i] = 1.0
        cols.append(e.reshape(-1))
    r = math.sqrt(0.5)
    for i in range(n):
        for j in range(i + 1, n):
            e = np.zeros((n, n), dtype=complex)
            e[i, j] = e[j, i] = r
            cols.append(e.reshape(-1))
            e = np.zeros((n, n), dtype=complex)
            e[i, j], e[j, i] = -1j * r, 1j * r
            cols.append(e.reshape(-1))
    return np.array(cols).T


class _Integrator:
    """Fixed-step RK4 over a batch of density matrices.

    States are carried as real coordinates in :func:`hermitian_basis`, which
    keeps them Hermitian at every step without re-symmetrizing.
    """

    def __init__(self, sup: np.ndarray, dim: int, dt: float):
        self.dim = dim
        self.dt = dt
        self.basis = hermitian_basis(dim)
        self.sup_real = np.real(dagger(self.basis) @ sup @ self.basis)
        self.step_matrix = rk4_propagator(self.sup_real, dt).real
        self.trace_row = np.zeros(dim * dim)
        self.trace_row[:dim] = 1.0

    def to_coords(self, v: np.ndarray) -> np.ndarray:
        return np.real(dagger(self.basis) @ v)

    def run(self, v0: np.ndarray, t_final: float, every: int | None):
        """Yield ``(t, V, drift)`` every ``every`` steps and at ``t_final``.

        ``V`` holds one row-major vectorized state per column. Raises once
        the trace drifts beyond ``TRACE_ABORT``.
        """
        n_full, h_last = _step_plan(t_final, self.dt)
        x = self.to_coords(v0)
        if x.shape[1] == 1:
            x = x[:, 0]
        basis, t_mat, tr_row = self.basis, self.step_matrix, self.trace_row
        tr0 = tr_row @ x
        drift = 0.0
        as_cols = (lambda y: basis @ y) if x.ndim == 2 else (lambda y: (basis @ y)[:, None])
        yield 0.0, as_cols(x), drift
        batched = x.ndim == 2
        for k in range(1, n_full + 1):
            x = t_mat.dot(x)
            d = tr_row.dot(x) - tr0
            d = float(np.max(np.abs(d))) if batched else abs(float(d))
            if d > drift:
                drift = d
                if drift > TRACE_ABORT:
                    raise PhysicsError(
                        f"trace drift {drift:.3e} at t={k * self.dt:.6g}; reduce dt (now {self.dt})"
                    )
            if (every and k % every == 0) or (k == n_full and h_last == 0.0):
                yield k * self.dt, as_cols(x), drift
        if h_last > 0.0:
            x = rk4_propagator(self.sup_real, h_last).real @ x
            drift = max(drift, float(np.max(np.abs(tr_row @ x - tr0))))
            yield t_final, as_cols(x), drift


def evolve(
    h,
    q: float,
    dissipator,
    rho0,
    t_final: float,
    dt: float = DEFAULT_DT,
    record_every: int | None = 1,
    atom_dim: int = 2,
) -> EvolutionResult:
    """Integrate the master equation with fixed-step RK4.

    States are recorded every ``record_every`` steps (``None``: only the
    initial and final state).
    """
    h = as_matrix(h, "H")
    rho0 = as_matrix(rho0, "rho0")
    n = h.shape[0]
    if rho0.shape != (n, n):
        raise DimensionError(f"rho0 shape {rho0.shape} does not match H ({n}x{n})")
    herm = hermiticity_error(rho0)
    if herm > 1e-10:
        raise ValidationError(f"rho0 is not Hermitian ({herm:.3e})", ["hermitian"])
    sup = liouvillian(h, q, dissipator, atom_dim)
    integ = _Integrator(sup, n, dt)
    times, states, drift = [], [], 0.0
    for t, v, drift in integ.run(rho0.reshape(-1, 1), t_final, record_every):
        times.append(t)
        states.append(v[:, 0].reshape(n, n).copy())
    return EvolutionResult(times, states, drift)


def evolve_exact(h, rho0, times) -> list[np.ndarray]:
    """Closed-system evolution ``e^{-iHt} rho0 e^{iHt}`` via eigendecomposition."""
    evals, vecs = hermitian_eigensystem(h)
    rho_eig = dagger(vecs) @ as_matrix(rho0) @ vecs
    out = []
    for t in times:
        ph = np.exp(-1j * evals * t)
        out.append(vecs @ (np.outer(ph, ph.conj()) * rho_eig) @ dagger(vecs))
    return out


# field tomography inputs: |0>, |1>, |+>, |+i>
_PLUS = np.array([1.0, 1.0]) / np.sqrt(2.0)
_PLUS_I = np.array([1.0, 1j]) / np.sqrt(2.0)
TOMOGRAPHY_INPUTS = (
    np.diag([1.0, 0.0]).astype(complex),
    np.diag([0.0, 1.0]).astype(complex),
    np.outer(_PLUS, _PLUS.conj()),
    np.outer(_PLUS_I, _PLUS_I.conj()),
)


def joint_initial_state(field_state, atom_dim: int) -> np.ndarray:
    ground = np.zeros((atom_dim, atom_dim), dtype=complex)
    ground[0, 0] = 1.0
    return np.kron(as_matrix(field_state), ground)


def photon_probability(joint, atom_dim: int) -> float:
    """Projector measurement of one photon on the joint state."""
    joint = np.asarray(joint)
    return float(np.real(np.trace(joint[atom_dim:, atom_dim:])))


def field_state(joint, atom_dim: int) -> np.ndarray:
    return partial_trace(joint, (2, atom_dim), keep=[0])


@dataclass(frozen=True)
class FieldTomography:
    """Reconstructed field channel images of the matrix units ``|i><j|``."""

    images: dict
    outputs: tuple[np.ndarray, ...]
    p_direct: float
    trace_drift: float

    @property
    def sigma(self) -> np.ndarray:
        return self.images[(1, 1)]

    @property
    def gamma(self) -> complex:
        return complex(self.images[(0, 1)][0, 1])

    def params(self) -> LossChannelParams:
        return LossChannelParams(self.sigma, self.gamma)


def reconstruct_images(outputs) -> dict:
    """Matrix-unit images from the outputs for ``|0>, |1>, |+>, |+i>``."""
    r0, r1, rp, ri = outputs
    e01 = rp + 1j * ri - 0.5 * (1 + 1j) * (r0 + r1)
    return {(0, 0): r0, (1, 1): r1, (0, 1): e01, (1, 0): dagger(e01)}


def _field_outputs(model: Model, integ: _Integrator, t: float):
    ad = model.atom_dim
    n = 2 * ad
    v0 = np.stack([joint_initial_state(s, ad).reshape(-1) for s in TOMOGRAPHY_INPUTS], axis=1)
    final, drift = None, 0.0
    for _, v, drift in integ.run(v0, t, None):
        final = v
    joints = [final[:, c].reshape(n, n) for c in range(4)]
    return joints, drift


def field_tomography(model: Model, t: float, dt: float = DEFAULT_DT) -> FieldTomography:
    """Process tomography of the field channel after time ``t``.

    The atom starts in its ground state for every input.
    """
    ad = model.atom_dim
    integ = _Integrator(model.liouvillian(), 2 * ad, dt)
    joints, drift = _field_outputs(model, integ, t)
    outputs = tuple(field_state(j, ad) for j in joints)
    return FieldTomography(reconstruct_images(outputs), outputs, photon_probability(joints[1], ad), drift)


def extract_field_channel(
    model: Model, t: float, dt: float = DEFAULT_DT, validity_tol: float = 1e-6
) -> LossChannelParams:
    tomo = field_tomography(model, t, dt)
    check_field_channel(tomo, validity_tol)
    return tomo.params()


def check_field_channel(tomo: FieldTomography, validity_tol: float = 1e-6) -> None:
    vac = float(np.real(tomo.images[(0, 0)][0, 0]))
    if abs(vac - 1.0) > 1e-8:
        raise PhysicsError(f"vacuum not preserved (<0|Phi(|0><0|)|0> = {vac:.12g}); check the model")
    bad = tomo.params().violations(validity_tol)
    if bad:
        raise PhysicsError("extracted channel invalid (integrator error?): " + "; ".join(bad))
