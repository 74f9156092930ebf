"""Dense complex linear algebra on small Hilbert spaces.

Matrices are plain ``numpy`` complex arrays. Tensor products follow the
Kronecker convention with the left factor most significant, i.e. the basis
state ``|i>|k>`` sits at flat index ``i * dim_B + k``. Every module relies on
that convention.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import prod
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, ValidationError

MAX_DIM = 4096
HERMITIAN_TOL = 1e-10


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    """Coerce ``m`` to a finite 2-D complex array."""
    a = np.asarray(m, dtype=complex)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    if a.ndim != 2 or a.size == 0:
        raise DimensionError(f"{name} must be a non-empty 2-D array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError(f"{name} has non-finite entries", ["finite"])
    return a


def as_vector(v, name: str = "vector") -> np.ndarray:
    a = np.asarray(v, dtype=complex).reshape(-1)
    if a.size == 0 or not np.all(np.isfinite(a)):
        raise ValidationError(f"{name} must be a non-empty finite vector", ["finite"])
    return a


def ket(index: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def projector(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1)
    return np.outer(v, v.conj())


def matrix_unit(i: int, j: int, dim: int) -> np.ndarray:
    e = np.zeros((dim, dim), dtype=complex)
    e[i, j] = 1.0
    return e


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.transpose(m))


@dataclass(frozen=True)
class HilbertLabel:
    """Tensor-factor dimensions of a composite space (left factor first)."""

    dims: tuple[int, ...]
    names: tuple[str, ...] | None = field(default=None)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims or any(d < 1 for d in dims):
            raise DimensionError(f"factor dimensions must be positive, got {self.dims}")
        object.__setattr__(self, "dims", dims)
        if self.names is not None:
            names = tuple(self.names)
            if len(names) != len(dims):
                raise DimensionError("names and dims must have equal length")
            object.__setattr__(self, "names", names)

    @property
    def total(self) -> int:
        return prod(self.dims)

    def index(self, factor: int | str) -> int:
        if isinstance(factor, str):
            if self.names is None or factor not in self.names:
                raise DimensionError(f"unknown factor name {factor!r}")
            return self.names.index(factor)
        if not 0 <= factor < len(self.dims):
            raise DimensionError(f"factor index {factor} out of range")
        return factor


def tensor_product(a, b, max_dim: int = MAX_DIM) -> np.ndarray:
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    rows, cols = a.shape[0] * b.shape[0], a.shape[1] * b.shape[1]
    if rows > max_dim or cols > max_dim:
        raise DimensionError(f"tensor product {rows}x{cols} exceeds cap {max_dim}")
    return np.kron(a, b)


def tensor(*factors, max_dim: int = MAX_DIM) -> np.ndarray:
    """Left-to-right tensor product of any number of factors."""
    out = as_matrix(factors[0])
    for f in factors[1:]:
        out = tensor_product(out, f, max_dim=max_dim)
    return out


def partial_trace(m, label: HilbertLabel | Sequence[int], keep: Iterable[int | str]) -> np.ndarray:
    """Trace out every factor not listed in ``keep``.

    Kept factors retain their original relative order.
    """
    m = as_matrix(m)
    if not isinstance(label, HilbertLabel):
        label = HilbertLabel(tuple(label))
    if m.shape[0] != m.shape[1]:
        raise DimensionError("partial trace needs a square matrix")
    if label.total != m.shape[0]:
        raise DimensionError(f"label dims {label.dims} do not match matrix size {m.shape[0]}")
    keep_idx = sorted({label.index(k) for k in keep})
    if not keep_idx:
        raise DimensionError("keep set must be non-empty")

    n = len(label.dims)
    t = m.reshape(label.dims + label.dims)
    # trace from the highest factor down so remaining axis numbers stay valid
    for f in sorted(set(range(n)) - set(keep_idx), reverse=True):
        cur = t.ndim // 2
        t = np.trace(t, axis1=f, axis2=f + cur)
    d = prod(label.dims[k] for k in keep_idx)
    return t.reshape(d, d)


def operator_norm(m) -> float:
    """Largest singular value."""
    return float(np.linalg.norm(as_matrix(m), 2))


def hermiticity_error(m) -> float:
    m = np.asarray(m)
    return float(np.max(np.abs(m - dagger(m)))) if m.size else 0.0


def hermitian_eigensystem(m, tol: float = HERMITIAN_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Ascending real eigenvalues and orthonormal eigenvector columns."""
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise DimensionError("eigensystem needs a square matrix")
    err = hermiticity_error(m)
    if err > tol:
        raise ValidationError(f"matrix is not Hermitian (max |m - m^H| = {err:.3e})", ["hermitian"])
    return np.linalg.eigh(0.5 * (m + dagger(m)))


def svd(m) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(U, d, W)`` with ``m = U[:, :r] @ diag(d) @ W[:, :r]^H``.

    ``U`` and ``W`` are full square unitaries, ``d`` is non-increasing with
    length ``r = min(rows, cols)``.
    """
    u, d, wh = np.linalg.svd(as_matrix(m), full_matrices=True)
    return u, d, dagger(wh)


@dataclass(frozen=True)
class DensityCheck:
    valid: bool
    failures: tuple[str, ...]
    hermiticity_error: float
    trace_error: float
    min_eigenvalue: float

    def __bool__(self) -> bool:
        return self.valid


def validate_density_operator(m, tol: float = 1e-10) -> DensityCheck:
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise DimensionError("density operator must be square")
    failures = []
    herm = hermiticity_error(m)
    if herm > tol:
        failures.append("hermitian")
    tr_err = abs(np.trace(m) - 1.0)
    if tr_err > tol:
        failures.append("unit_trace")
    min_eig = float(np.linalg.eigvalsh(0.5 * (m + dagger(m)))[0])
    if min_eig < -tol:
        failures.append("positive_semidefinite")
    return DensityCheck(not failures, tuple(failures), herm, float(tr_err), min_eig)


# JSON wire format: {"rows": n, "cols": m, "entries": [[re, im], ...]} row-major.

def matrix_to_json(m) -> dict:
    m = as_matrix(m)
    return {
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "entries": [[float(z.real), float(z.imag)] for z in m.reshape(-1)],
    }


def complex_from_pair(pair, what: str = "complex number") -> complex:
    if not isinstance(pair, (list, tuple)) or len(pair) != 2:
        raise ValidationError(f"{what} must be a [re, im] pair, got {pair!r}", ["format"])
    try:
        return complex(float(pair[0]), float(pair[1]))
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"bad {what}: {pair!r}", ["format"]) from exc


def matrix_from_json(obj) -> np.ndarray:
    try:
        rows, cols, entries = int(obj["rows"]), int(obj["cols"]), obj["entries"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError("matrix JSON needs rows, cols and entries", ["format"]) from exc
    if rows < 1 or cols < 1:
        raise ValidationError("rows and cols must be positive", ["format"])
    if rows > MAX_DIM or cols > MAX_DIM:
        raise DimensionError(f"matrix {rows}x{cols} exceeds cap {MAX_DIM}")
    if not isinstance(entries, list) or len(entries) != rows * cols:
        n = len(entries) if isinstance(entries, list) else "?"
        raise ValidationError(f"expected {rows * cols} entries, got {n}", ["entry_count"])
    data = np.array([complex_from_pair(e, "matrix entry") for e in entries], dtype=complex)
    return as_matrix(data.reshape(rows, cols))
