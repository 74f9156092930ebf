"""Command-line interface.

Exit codes: 0 ok, 2 usage, 3 validation, 4 I/O, 5 physics/property
violation, 6 linear-optics vacuum test failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .channel import (
    INEQUALITY_TOL,
    KrausChannel,
    check_exclusion_inequality,
    lpc,
    random_psi_perp,
    random_vacuum_preserving_channel,
)
from .errors import (
    NotVacuumPreservingError,
    PhysicsError,
    VacuumCompatibilityError,
    ValidationError,
)
from .interferometer import fringe, max_visibility_scan
from .linear_optics import AncillaState, ModeUnitary, induced_channel, vacuum_preservation_test
from .operators import complex_from_pair
from .spectra import (
    DEFAULT_ENVELOPE,
    SweepConfig,
    default_sweep,
    records_to_csv,
    run_sweep,
    summarize,
)

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_IO, EXIT_PHYSICS, EXIT_LINOPT = 0, 2, 3, 4, 5, 6


class CliFailure(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _positive_int(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {n}")
    return n


def _nonneg_int(text: str) -> int:
    n = int(text)
    if n < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {n}")
    return n


def parse_complex_vector(text: str) -> np.ndarray:
    """``"0,1"`` or ``"0, 0.6+0.8j"``: comma-separated ``re+imj`` literals."""
    try:
        vals = [complex(tok.strip().replace(" ", "")) for tok in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad complex vector literal: {text!r}")
    return np.array(vals, dtype=complex)


def _read_json(path) -> object:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CliFailure(EXIT_IO, f"cannot read {path}: {exc.strerror or exc}")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliFailure(EXIT_VALIDATION, f"{path} is not valid JSON: {exc}")


def _write_text(path, text: str) -> None:
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise CliFailure(EXIT_IO, f"cannot write {path}: {exc.strerror or exc}")


def _emit_json(args, obj) -> None:
    text = json.dumps(obj, indent=2) + "\n"
    if args.output:
        _write_text(args.output, text)
    else:
        sys.stdout.write(text)


def _info(args, msg: str) -> None:
    if not args.quiet:
        print(msg, file=sys.stderr)


def _load_psi(args, dim: int) -> np.ndarray:
    if args.psi_file:
        raw = _read_json(args.psi_file)
        if not isinstance(raw, list):
            raise CliFailure(EXIT_VALIDATION, "psi file must hold a list of [re, im] pairs")
        psi = np.array([complex_from_pair(p, "psi entry") for p in raw], dtype=complex)
    else:
        psi = args.psi
    if psi.size == dim - 1:
        # internal amplitudes only; prepend the vacuum entry
        psi = np.concatenate([[0.0], psi])
    norm = np.linalg.norm(psi)
    if psi.size != dim or norm == 0:
        raise CliFailure(EXIT_VALIDATION, f"psi must have {dim} (or {dim - 1}) non-zero entries")
    return psi / norm


def _load_channel(path) -> KrausChannel:
    return KrausChannel.from_json(_read_json(path))


def _pairs(v) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(v).reshape(-1)]


def cmd_lpc(args) -> int:
    ch = _load_channel(args.channel)
    psi = _load_psi(args, ch.dim)
    report = lpc(ch, psi, tol=args.tol or 1e-10)
    _emit_json(args, report.to_json())
    return EXIT_OK


def cmd_verify_inequality(args) -> int:
    rng = np.random.default_rng(args.seed)
    tol = args.tol or INEQUALITY_TOL
    min_slack = np.inf
    zero_loss_creation = []
    violations = 0
    for _ in range(args.count):
        ch = random_vacuum_preserving_channel(args.dim, args.anc, rng)
        for _ in range(args.psi_per_channel):
            rep = lpc(ch, random_psi_perp(args.dim, rng))
            min_slack = min(min_slack, rep.inequality_slack)
            if rep.loss <= 1e-9:
                zero_loss_creation.append(rep.creation)
            if not check_exclusion_inequality(rep, tol=tol):
                violations += 1
    summary = {
        "count": args.count,
        "dim": args.dim,
        "anc": args.anc,
        "seed": args.seed,
        "psi_per_channel": args.psi_per_channel,
        "min_slack": float(min_slack),
        "zero_loss_cases": len(zero_loss_creation),
        "min_creation_at_zero_loss": min(zero_loss_creation) if zero_loss_creation else None,
        "max_creation_at_zero_loss": max(zero_loss_creation) if zero_loss_creation else None,
        "violations": violations,
        "pass": violations == 0,
    }
    _emit_json(args, summary)
    if violations:
        _info(args, f"error: {violations} inequality violations (min slack {min_slack:.3e})")
        return EXIT_PHYSICS
    return EXIT_OK


def cmd_linopt(args) -> int:
    mu = ModeUnitary.from_json(_read_json(args.smatrix))
    if args.ancilla == "vacuum":
        eta = AncillaState.vacuum(mu.J)
    else:
        eta = AncillaState.from_json(_read_json(args.ancilla))
    test = vacuum_preservation_test(mu, eta)
    result = {
        "vacuum_test": {
            "passed": test.passed,
            "singular_values": list(test.singular_values),
            "offending_modes": list(test.offending_modes),
        }
    }
    if not test:
        _emit_json(args, result)
        _info(args, f"error: vacuum preservation test failed, offending modes {list(test.offending_modes)}")
        return EXIT_LINOPT
    ch = induced_channel(mu, eta)
    psi = np.concatenate([[0.0], np.full(mu.K, 1.0 / np.sqrt(mu.K))])
    result["channel"] = ch.to_json()
    result["psi_perp"] = _pairs(psi)
    result["lpc"] = lpc(ch, psi).to_json()
    if args.emit_channel:
        _write_text(args.emit_channel, json.dumps(ch.to_json(), indent=2) + "\n")
    _emit_json(args, result)
    return EXIT_OK


def cmd_mz(args) -> int:
    ch = _load_channel(args.channel)
    psi = _load_psi(args, ch.dim)
    report = lpc(ch, psi, tol=args.tol or 1e-10)
    _, best_u = max_visibility_scan(ch, psi, args.scan_unitaries, args.chi_points, seed=args.seed)
    fr = fringe(ch, psi, best_u, args.chi_points)
    expected_offset = 0.5 - 0.25 * report.loss
    if abs(fr.offset - expected_offset) > 1e-9:
        raise PhysicsError(f"fringe offset {fr.offset!r} != 1/2 - L/4 = {expected_offset!r}")
    if args.fringe_csv:
        lines = ["chi,p_A"] + [f"{c:.17g},{p:.17g}" for c, p in zip(fr.chi, fr.p_a)]
        _write_text(args.fringe_csv, "\n".join(lines) + "\n")
    _emit_json(args, {
        "visibility": fr.visibility,
        "offset": fr.offset,
        "best_phase": fr.best_phase,
        "loss": report.loss,
        "preservation": report.preservation,
        "chi_points": args.chi_points,
        "scanned_unitaries": args.scan_unitaries,
    })
    return EXIT_OK


def cmd_spectrum(args) -> int:
    if args.config:
        cfg = SweepConfig.from_json(_read_json(args.config))
        if cfg.model.kind != args.model:
            raise ValidationError(f"config holds a {cfg.model.kind} model, expected {args.model}")
        if args.dissipator is not None:
            if args.model != "jc":
                raise ValidationError("--dissipator applies to the jc model only")
            cfg = replace(cfg, model=replace(cfg.model, dissipator=args.dissipator))
        if args.envelope and cfg.envelope is None:
            cfg = replace(cfg, envelope=DEFAULT_ENVELOPE)
    else:
        if args.dissipator not in (None, "none") and args.model != "jc":
            raise ValidationError("--dissipator applies to the jc model only")
        cfg = default_sweep(args.model, args.dissipator, args.envelope)

    start = time.perf_counter()
    records = run_sweep(cfg, workers=args.workers)
    wall = time.perf_counter() - start
    text = records_to_csv(records)
    line = summarize(records).line(wall)
    if args.output:
        _write_text(args.output, text)
        if not args.quiet:
            print(line)
    else:
        sys.stdout.write(text)
        _info(args, line)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for all randomized output")
    common.add_argument("--tol", type=float, default=None, help="override validity tolerance")
    common.add_argument("-o", "--output", default=None, help="write the result here instead of stdout")
    common.add_argument("--quiet", action="store_true", help="suppress diagnostics on stderr")

    parser = argparse.ArgumentParser(
        prog="coherence-spectra",
        description="Loss, coherence preservation and superposition creation of vacuum-preserving channels.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_psi(p):
        g = p.add_mutually_exclusive_group(required=True)
        g.add_argument("--psi", type=parse_complex_vector,
                       help='input state, e.g. "0,1" or "0.6,0.8j" (normalized; vacuum entry optional)')
        g.add_argument("--psi-file", help="JSON list of [re, im] amplitudes")

    p = sub.add_parser("lpc", parents=[common], help="loss / preservation / creation of a channel")
    p.add_argument("--channel", required=True, help="channel JSON file")
    add_psi(p)
    p.set_defaults(func=cmd_lpc)

    p = sub.add_parser("verify-inequality", parents=[common],
                       help="check the exclusion inequality on random vacuum-preserving channels")
    p.add_argument("--count", type=_positive_int, default=1000)
    p.add_argument("--dim", type=_positive_int, default=1, help="single-particle dimension d")
    p.add_argument("--anc", type=_positive_int, default=2, help="ancilla dimension")
    p.add_argument("--psi-per-channel", type=_positive_int, default=20)
    p.set_defaults(func=cmd_verify_inequality)

    p = sub.add_parser("linopt", parents=[common], help="channel induced by a linear-optics mode unitary")
    p.add_argument("--smatrix", required=True, help="mode unitary JSON file")
    p.add_argument("--ancilla", default="vacuum", help='ancilla state JSON file or "vacuum"')
    p.add_argument("--emit-channel", default=None, help="also write the channel JSON here")
    p.set_defaults(func=cmd_linopt)

    p = sub.add_parser("mz", parents=[common], help="Mach-Zehnder fringes through a channel")
    p.add_argument("--channel", required=True, help="channel JSON file")
    add_psi(p)
    p.add_argument("--chi-points", type=_positive_int, default=64)
    p.add_argument("--scan-unitaries", type=_nonneg_int, default=0,
                   help="random unitaries to scan besides the optimal one")
    p.add_argument("--fringe-csv", default=None, help="write the (chi, p_A) fringe CSV here")
    p.set_defaults(func=cmd_mz)

    p = sub.add_parser("spectrum", parents=[common], help="sweep a model and write spectra CSV")
    p.add_argument("model", choices=["jc", "three-level"])
    p.add_argument("--config", default=None, help="sweep config JSON (defaults per model otherwise)")
    p.add_argument("--dissipator", choices=["none", "relaxation", "dephasing"], default=None)
    p.add_argument("--envelope", action="store_true", help="also record long-time envelopes")
    p.add_argument("--workers", type=_positive_int, default=1)
    p.set_defaults(func=cmd_spectrum)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 after --help/--version
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except CliFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except NotVacuumPreservingError as exc:
        print(f"error: {exc} [vacuum_violation={exc.magnitude:.6e}]", file=sys.stderr)
        return EXIT_VALIDATION
    except VacuumCompatibilityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_LINOPT
    except PhysicsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    except (ValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
