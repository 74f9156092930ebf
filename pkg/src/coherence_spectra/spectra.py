"""Frequency sweeps producing absorption, coherence-loss and superposition spectra."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .dynamics import (
    DEFAULT_DT,
    JcConfig,
    Model,
    ThreeLevelConfig,
    _Integrator,
    check_field_channel,
    field_tomography,
    joint_initial_state,
    model_from_json,
    model_to_json,
)
from .errors import CoherenceError, PhysicsError, ValidationError

CSV_HEADER = ("x", "p", "excess_loss", "sigma01_abs", "p_min_envelope", "sigma01_max_envelope")
DEFAULT_ENVELOPE = (500.0, 0.5)

_AXES = {
    "delta": "delta",
    "detuning_delta": "delta",
    "omega": "omega",
    "photon_energy_omega": "omega",
}


@dataclass(frozen=True)
class SweepConfig:
    model: Model
    axis: str
    grid: tuple[float, float, int]
    snapshot_time: float
    envelope: tuple[float, float] | None = None
    dt: float = DEFAULT_DT

    def __post_init__(self):
        axis = _AXES.get(self.axis)
        if axis is None:
            raise ValidationError(f"unknown axis {self.axis!r}", ["axis"])
        object.__setattr__(self, "axis", axis)
        if axis == "delta" and not isinstance(self.model, JcConfig):
            raise ValidationError("detuning axis needs a two-level (jc) model", ["axis"])
        start, stop, points = self.grid
        object.__setattr__(self, "grid", (float(start), float(stop), int(points)))
        bad = []
        if int(points) < 2:
            bad.append("points >= 2")
        if not float(start) < float(stop):
            bad.append("start < stop")
        if self.envelope is not None:
            t_max, t_step = map(float, self.envelope)
            object.__setattr__(self, "envelope", (t_max, t_step))
            if t_step <= 0:
                bad.append("t_step > 0")
            elif t_max < t_step:
                bad.append("t_max >= t_step")
            elif abs(t_step / self.dt - round(t_step / self.dt)) > 1e-9:
                bad.append("t_step multiple of dt")
        if self.snapshot_time < 0 or self.dt <= 0:
            bad.append("snapshot_time >= 0 and dt > 0")
        if bad:
            raise ValidationError("invalid sweep config: " + ", ".join(bad), bad)

    def grid_values(self) -> np.ndarray:
        start, stop, points = self.grid
        return np.linspace(start, stop, points)

    def model_at(self, x: float) -> Model:
        if self.axis == "delta":
            return replace(self.model, omega=self.model.omega_a + float(x))
        return replace(self.model, omega=float(x))

    def to_json(self) -> dict:
        start, stop, points = self.grid
        out = {
            "model": model_to_json(self.model),
            "axis": self.axis,
            "grid": {"start": start, "stop": stop, "points": points},
            "snapshot_time": self.snapshot_time,
            "dt": self.dt,
        }
        if self.envelope is not None:
            out["envelope"] = {"t_max": self.envelope[0], "t_step": self.envelope[1]}
        return out

    @classmethod
    def from_json(cls, obj) -> "SweepConfig":
        try:
            grid = obj["grid"]
            env = obj.get("envelope")
            return cls(
                model=model_from_json(obj["model"]),
                axis=obj["axis"],
                grid=(grid["start"], grid["stop"], grid["points"]),
                snapshot_time=float(obj["snapshot_time"]),
                envelope=None if env is None else (env["t_max"], env["t_step"]),
                dt=float(obj.get("dt", DEFAULT_DT)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, CoherenceError):
                raise
            raise ValidationError(f"bad sweep config: {exc!r}", ["format"]) from exc


def default_sweep(kind: str, dissipator: str | None = None, envelope: bool = False) -> SweepConfig:
    """Sweeps over the default grids for the two model systems."""
    if kind == "jc":
        model = JcConfig(omega=1.0, omega_a=1.0, g=0.1, q=0.01, dissipator=dissipator or "none")
        return SweepConfig(
            model, "delta", (-1.0, 1.0, 101), math.pi / (2 * model.g),
            DEFAULT_ENVELOPE if envelope else None,
        )
    if kind in ("three-level", "three_level"):
        return SweepConfig(
            ThreeLevelConfig(), "omega", (0.5, 3.5, 301), 25.0,
            DEFAULT_ENVELOPE if envelope else None,
        )
    raise ValidationError(f"unknown model kind {kind!r}", ["kind"])


@dataclass(frozen=True)
class SpectrumRecord:
    x: float
    p: float
    excess_loss: float
    sigma01_abs: float
    p_min_envelope: float | None = None
    sigma01_max_envelope: float | None = None


def envelope(model: Model, t_max: float, t_step: float, dt: float = DEFAULT_DT) -> tuple[float, float]:
    """Min photon probability and max ``|sigma01|`` over one long trajectory.

    The photon starts in ``|1>``, the atom in its ground state; samples are
    taken every ``t_step`` from ``t = 0`` to ``t_max``.
    """
    if t_step <= 0 or t_max < t_step:
        raise ValidationError("need t_max >= t_step > 0", ["t_max >= t_step"])
    every = round(t_step / dt)
    if every < 1 or abs(t_step / dt - every) > 1e-9:
        raise ValidationError("t_step must be a multiple of dt", ["t_step"])
    ad = model.atom_dim
    n = 2 * ad
    integ = _Integrator(model.liouvillian(), n, dt)
    v0 = joint_initial_state(np.diag([0.0, 1.0]), ad).reshape(-1, 1)
    # flat indices of <1,k|rho|1,k> and <0,k|rho|1,k> in the vectorized state
    k = np.arange(ad)
    photon_diag = (ad + k) * n + (ad + k)
    coherence = k * n + (ad + k)
    p_min, s_max = math.inf, 0.0
    for _, v, _ in integ.run(v0, t_max, every):
        v = v[:, 0]
        p_min = min(p_min, float(v[photon_diag].sum().real))
        s_max = max(s_max, float(abs(v[coherence].sum())))
    return p_min, s_max


def compute_point(cfg: SweepConfig, index: int) -> SpectrumRecord:
    x = float(cfg.grid_values()[index])
    model = cfg.model_at(x)
    try:
        tomo = field_tomography(model, cfg.snapshot_time, cfg.dt)
        check_field_channel(tomo)
        params = tomo.params()
        p = tomo.p_direct
        if abs(p - (1.0 - params.sigma00)) > 1e-10:
            raise PhysicsError(f"photon probability {p!r} disagrees with 1 - sigma00")
        excess = params.excess_coherence_loss
        if excess < -1e-8:
            raise PhysicsError(f"negative excess coherence loss {excess:.3e}")
        p_min = s_max = None
        if cfg.envelope is not None:
            p_min, s_max = envelope(model, *cfg.envelope, dt=cfg.dt)
    except PhysicsError as exc:
        raise PhysicsError(str(exc), point_index=index) from exc
    return SpectrumRecord(x, p, excess, abs(params.sigma01), p_min, s_max)


def _point_worker(args):
    return compute_point(*args)


def run_sweep(cfg: SweepConfig, workers: int = 1) -> list[SpectrumRecord]:
    """Evaluate every grid point; results are returned in grid order."""
    indices = range(cfg.grid[2])
    if workers <= 1:
        return [compute_point(cfg, i) for i in indices]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_point_worker, [(cfg, i) for i in indices]))


def _fmt(v: float | None) -> str:
    return "" if v is None else format(float(v), ".17g")


def records_to_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in records:
        w.writerow([_fmt(getattr(r, name)) for name in CSV_HEADER])
    return buf.getvalue()


def write_csv(records, path) -> None:
    records = list(records)
    if not records:
        raise ValidationError("no records to write", ["non_empty"])
    with open(path, "w", newline="", encoding="ascii") as fh:
        fh.write(records_to_csv(records))


def parse_csv(text: str) -> list[SpectrumRecord]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != CSV_HEADER:
        raise ValidationError("unexpected spectrum CSV header", ["header"])
    out = []
    for row in rows[1:]:
        vals = [None if cell == "" else float(cell) for cell in row]
        out.append(SpectrumRecord(*vals))
    return out


def read_csv(path) -> list[SpectrumRecord]:
    return parse_csv(Path(path).read_text(encoding="ascii"))


@dataclass(frozen=True)
class SweepSummary:
    points: int
    min_p: float
    max_excess_loss: float
    max_sigma01: float
    min_p_envelope: float | None
    max_sigma01_envelope: float | None

    def line(self, wall_time: float | None = None) -> str:
        parts = [
            f"points={self.points}",
            f"min_p={self.min_p:.6e}",
            f"max_excess_loss={self.max_excess_loss:.6e}",
            f"max_sigma01={self.max_sigma01:.6e}",
        ]
        if self.min_p_envelope is not None:
            parts.append(f"min_p_envelope={self.min_p_envelope:.6e}")
            parts.append(f"max_sigma01_envelope={self.max_sigma01_envelope:.6e}")
        if wall_time is not None:
            parts.append(f"wall_time={wall_time:.2f}s")
        return " ".join(parts)


def summarize(records) -> SweepSummary:
    records = list(records)
    env = records[0].p_min_envelope is not None
    return SweepSummary(
        len(records),
        min(r.p for r in records),
        max(r.excess_loss for r in records),
        max(r.sigma01_abs for r in records),
        min(r.p_min_envelope for r in records) if env else None,
        max(r.sigma01_max_envelope for r in records) if env else None,
    )


def smooth3(values) -> np.ndarray:
    """3-point moving average over interior points (length ``n - 2``)."""
    v = np.asarray(values, dtype=float)
    return (v[:-2] + v[1:-1] + v[2:]) / 3.0


def local_maxima(x, values) -> np.ndarray:
    """Grid positions where the smoothed curve beats both neighbours."""
    x = np.asarray(x, dtype=float)[1:-1]
    s = smooth3(values)
    idx = np.nonzero((s[1:-1] > s[:-2]) & (s[1:-1] > s[2:]))[0] + 1
    return x[idx]


def local_minima(x, values) -> np.ndarray:
    return local_maxima(x, -np.asarray(values, dtype=float))
