"""
Command-line interface.

``openholonomy holonomy`` runs the holonomy pipeline on a tripod path or a
sampled curve and writes a JSON result document; ``openholonomy verify``
runs the self-verification suite.

Exit codes: 0 ok, 1 usage error, 2 orthogonal endpoints, 3 curve too coarse
(or integrator failure), 4 I/O or file format, 5 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import tripod as tp
from .adiabatic import evolve, extract_gate
from .curves import Frame, FrameCurve, continuation_frames, sample_curve
from .errors import (
    CurveTooCoarseError,
    FileFormatError,
    HolonomyError,
    IntegratorError,
    InvalidInputError,
    OrthogonalEndpointsError,
)
from .fileio import dumps_result, read_frame_file, read_projector_file
from .holonomy import (
    DEFAULT_FD_STEP,
    Overlap,
    commutator_defect,
    compute_holonomy,
    connection_at,
    discrete_gamma,
    sorted_eigenvalues,
)
from .matcore import DEFAULT_RANK_TOL
from .verify import CHECKS, VerifyConfig, run_checks

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_ORTHOGONAL = 2
EXIT_TOO_COARSE = 3
EXIT_IO = 4
EXIT_VERIFY = 5

SOURCE_KINDS = ("tripod", "frames", "projectors")
ORACLES = ("analytic", "adiabatic", "gamma")
DEFAULT_TRIPOD_STEPS = 4096
MAX_RANK_TOL = 1e-2
RESULT_FORMAT = "openholonomy-result/1"
# at most this many points in the ||A(s)|| plot series
PLOT_POINTS = 513


@dataclass(frozen=True)
class JobSpec:
    """
    One holonomy job.

    ``source`` is a path-spec dict for ``source_kind == "tripod"`` and a file
    path otherwise. ``n_steps=None`` means 4096 for tripod paths and the
    stored resolution for sampled curves.
    """

    source_kind: str
    source: object
    n_steps: Optional[int] = None
    rank_tol: float = DEFAULT_RANK_TOL
    oracles: tuple = ()
    t_total: float = 500.0
    n_time_steps: int = 100_000
    output: Optional[str] = None
    plot_csv: Optional[str] = None
    energy_shift: float = 0.0

    def __post_init__(self):
        if self.source_kind not in SOURCE_KINDS:
            raise InvalidInputError(f"source must be one of {SOURCE_KINDS}")
        if self.n_steps is not None and self.n_steps < 2:
            raise InvalidInputError("n_steps must be >= 2")
        if not 0.0 < self.rank_tol <= MAX_RANK_TOL:
            raise InvalidInputError(f"rank_tol must lie in (0, {MAX_RANK_TOL}]")
        for o in self.oracles:
            if o not in ORACLES:
                raise InvalidInputError(f"unknown oracle {o!r}")
            if o in ("analytic", "adiabatic") and self.source_kind != "tripod":
                raise InvalidInputError(f"the {o} oracle needs a tripod source")
        if self.energy_shift and self.source_kind != "tripod":
            raise InvalidInputError("energy_shift needs a tripod source")
        if self.t_total <= 0 or self.n_time_steps < 1:
            raise InvalidInputError("t_total must be positive and n_time_steps >= 1")
        object.__setattr__(self, "oracles", tuple(dict.fromkeys(self.oracles)))


@dataclass
class Job:
    """A loaded source: the curve plus what the oracles need."""

    curve: FrameCurve
    n_steps: int
    path: Optional[tp.SpherePath] = None
    description: dict = field(default_factory=dict)
    # file line of each stored sample, for error messages
    lines: Optional[list] = None


def _frames_from_file(filename):
    s, mats, lines = read_frame_file(filename)
    frames = []
    for m, ln in zip(mats, lines):
        try:
            frames.append(Frame(m))
        except InvalidInputError as exc:
            raise FileFormatError(str(exc), line=ln)
    try:
        return FrameCurve.discrete(frames, s), lines
    except InvalidInputError as exc:
        raise FileFormatError(str(exc), line=lines[0])


def _projectors_from_file(filename, rank_tol):
    k, s, mats, lines = read_projector_file(filename)
    # initial frame: the top-k eigenvectors of the first projector
    evals, evecs = np.linalg.eigh(mats[0])
    f0 = evecs[:, ::-1][:, :k]
    if np.linalg.norm(mats[-1] @ f0, 2) <= rank_tol:
        raise OrthogonalEndpointsError(
            "initial and final subspaces are orthogonal; the holonomy is undefined"
        )
    try:
        return continuation_frames(mats, Frame(f0), s), lines
    except InvalidInputError as exc:
        raise FileFormatError(str(exc), line=lines[0])


def load_job(spec: JobSpec) -> Job:
    if spec.source_kind == "tripod":
        path = tp.SpherePath.from_dict(spec.source)
        n = spec.n_steps or DEFAULT_TRIPOD_STEPS
        return Job(tp.dark_curve(path), n, path, {"kind": "tripod", "path": path.to_dict()})
    if spec.source_kind == "frames":
        curve, lines = _frames_from_file(spec.source)
    else:
        curve, lines = _projectors_from_file(spec.source, spec.rank_tol)
    n = spec.n_steps or len(curve.samples) - 1
    desc = {"kind": spec.source_kind, "file": os.path.basename(str(spec.source))}
    return Job(curve, n, None, desc, lines)


def _deviation(a, b) -> float:
    return float(np.linalg.norm(np.asarray(a) - np.asarray(b)))


def run_oracles(spec: JobSpec, job: Job, result):
    """Per-oracle deviation records and the plot series they produce."""
    out, series = {}, []
    for name in spec.oracles:
        if name == "analytic":
            ref = tp.analytic_holonomy(job.path, spec.rank_tol)
            out[name] = {"deviation": _deviation(result.u_g, ref), "reference": ref}
        elif name == "gamma":
            frames = sample_curve(job.curve, job.n_steps)
            g = discrete_gamma(frames)
            out[name] = {
                "deviation": _deviation(g, result.gamma_operator),
                "n_samples": len(frames),
                "reference": g,
            }
        elif name == "adiabatic":
            model = tp.TripodModel(job.path, spec.energy_shift)
            path = job.path
            run = evolve(
                model,
                spec.t_total,
                spec.n_time_steps,
                result.initial_frame.columns,
                projector=lambda s: tp.dark_projector(path, s),
            )
            energy = (lambda s: spec.energy_shift) if spec.energy_shift else None
            gate, fidelity = extract_gate(run, result, energy)
            out[name] = {
                "deviation": _deviation(gate, result.u_g),
                "fidelity": fidelity,
                "gate": gate,
                "max_leakage": run.max_leakage,
                "max_norm_defect": float(np.max(run.norm_defect)),
                "t_total": spec.t_total,
                "n_time_steps": spec.n_time_steps,
            }
            series += [("leakage", t, v) for t, v in zip(run.times, run.leakage)]
    return out, series


def connection_series(curve: FrameCurve, n_steps: int):
    """``||A(s)||_F`` on an even grid of at most PLOT_POINTS points."""
    m = min(n_steps, PLOT_POINTS - 1)
    return [("connection_norm", s, float(np.linalg.norm(connection_at(curve, s).a_matrix)))
            for s in np.linspace(0.0, 1.0, m + 1)]


def build_document(spec: JobSpec, job: Job, result, oracles: dict) -> dict:
    rep = result.overlap
    overlapping = result.classification is Overlap.OVERLAPPING
    return {
        "format": RESULT_FORMAT,
        "source": job.description,
        "settings": {
            "n_steps": job.n_steps,
            "rank_tol": spec.rank_tol,
            "fd_step": DEFAULT_FD_STEP,
            "ordering": "later-left",
            "oracles": list(spec.oracles),
            "t_total": spec.t_total,
            "n_time_steps": spec.n_time_steps,
            "energy_shift": spec.energy_shift,
        },
        "classification": rep.classification.value,
        "rank": rep.rank,
        "near_singular": bool(rep.near_singular),
        "singular_values": rep.singulars,
        "u_g": result.u_g,
        "pexp": result.pexp,
        "u_m": result.u_m,
        "r_matrix": rep.positive_part,
        "m_matrix": rep.m_matrix,
        "eigenvalues_u_g": sorted_eigenvalues(result.u_g),
        "commutator_defect": commutator_defect(result) if overlapping else None,
        "gamma_operator": result.gamma_operator,
        "parallel_final_frame": result.parallel_final_frame.columns,
        "dynamical_phase": result.dynamical_phase,
        "oracles": oracles,
    }


def write_plot_csv(filename, rows) -> None:
    with open(filename, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["series", "x", "value"])
        for name, x, v in rows:
            w.writerow([name, repr(float(x)), repr(float(v))])


def cmd_holonomy(spec: JobSpec):
    """
    Run one job.

    Returns
    -------
    code : int
        Exit status.
    doc : dict or None
        The result document, None on failure.
    """
    job = None
    try:
        job = load_job(spec)
        energy = (lambda s: spec.energy_shift) if spec.energy_shift else None
        result = compute_holonomy(
            job.curve, job.n_steps, spec.rank_tol, energy=energy,
            t_total=spec.t_total if energy else None,
        )
        oracles, series = run_oracles(spec, job, result)
        doc = build_document(spec, job, result, oracles)
        text = dumps_result(doc)
        if spec.output:
            with open(spec.output, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        if spec.plot_csv:
            write_plot_csv(spec.plot_csv, connection_series(job.curve, job.n_steps) + series)
    except OrthogonalEndpointsError as exc:
        _err(exc)
        return EXIT_ORTHOGONAL, None
    except CurveTooCoarseError as exc:
        lines = job.lines if job is not None else None
        if lines is None and spec.source_kind == "projectors":
            # the failure happened while loading; recover the line numbers
            lines = read_projector_file(spec.source)[3]
        if lines is not None and exc.index is not None and exc.index < len(lines):
            exc = f"line {lines[exc.index]}: {exc}"
        _err(exc)
        return EXIT_TOO_COARSE, None
    except IntegratorError as exc:
        _err(exc)
        return EXIT_TOO_COARSE, None
    except (FileFormatError, OSError) as exc:
        _err(exc)
        return EXIT_IO, None
    except (InvalidInputError, KeyError, TypeError) as exc:
        _err(exc)
        return EXIT_USAGE, None
    return EXIT_OK, doc


def cmd_verify(cfg: VerifyConfig = VerifyConfig(), names=None, stream=None):
    """Run the verification suite, print one block per check, return ``(code, results)``."""
    stream = stream or sys.stdout
    results = run_checks(cfg, names)
    for r in results:
        stream.write(r.line() + "\n")
    n_pass = sum(r.passed for r in results)
    stream.write(f"{n_pass}/{len(results)} checks passed\n")
    return (EXIT_OK if n_pass == len(results) else EXIT_VERIFY), results


def _err(exc) -> None:
    sys.stderr.write(f"error: {exc}\n")


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors, which would collide with EXIT_ORTHOGONAL
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _tripod_source(text: str) -> dict:
    if os.path.exists(text):
        with open(text) as fh:
            raw = fh.read()
    else:
        raw = text
    try:
        d = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"tripod path spec is not valid JSON: {exc}")
    if not isinstance(d, dict) or "kind" not in d:
        raise InvalidInputError('tripod path spec must be a JSON object with a "kind" key')
    return d


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="openholonomy", description="Open-path non-Abelian holonomies.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    h = sub.add_parser("holonomy", help="compute the holonomy of a path or sampled curve")
    src = h.add_mutually_exclusive_group(required=True)
    src.add_argument("--tripod", metavar="SPEC",
                     help='tripod path as a JSON file or inline JSON, e.g. \'{"kind": '
                          '"meridian_then_latitude", "theta1": 1.047, "phi1": 1.571}\'')
    src.add_argument("--frames", metavar="FILE", help="sampled frame file")
    src.add_argument("--projectors", metavar="FILE", help="sampled projector file")
    h.add_argument("--n-steps", type=int, default=None,
                   help=f"steps (default {DEFAULT_TRIPOD_STEPS} for tripod paths, stored resolution for files)")
    h.add_argument("--rank-tol", type=float, default=DEFAULT_RANK_TOL)
    h.add_argument("--oracle", action="append", choices=ORACLES, default=[],
                   help="repeatable; analytic and adiabatic need --tripod")
    h.add_argument("--t-total", type=float, default=500.0)
    h.add_argument("--n-time-steps", type=int, default=100_000)
    h.add_argument("--energy-shift", type=float, default=0.0,
                   help="dark-state energy for the dynamical phase (tripod only)")
    h.add_argument("--output", metavar="FILE", help="result document (default stdout)")
    h.add_argument("--plot-csv", metavar="FILE", help="series,x,value rows: ||A(s)|| and leakage")

    v = sub.add_parser("verify", help="run the self-verification suite")
    v.add_argument("--rank-tol", type=float, default=DEFAULT_RANK_TOL)
    v.add_argument("--inject", choices=["ordering-flip"], default=None,
                   help="test hook: deliberately break the pipeline")
    v.add_argument("--seed", type=int, default=VerifyConfig.seed)
    v.add_argument("--check", action="append", choices=list(CHECKS), default=None,
                   help="run only this check (repeatable)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "verify":
        if args.rank_tol <= 0:
            _err("rank_tol must be positive")
            return EXIT_USAGE
        ordering = "later-right" if args.inject == "ordering-flip" else "later-left"
        cfg = VerifyConfig(rank_tol=args.rank_tol, ordering=ordering, seed=args.seed)
        code, _ = cmd_verify(cfg, args.check)
        return code

    try:
        if args.tripod is not None:
            kind, source = "tripod", _tripod_source(args.tripod)
            tp.SpherePath.from_dict(source)
        elif args.frames is not None:
            kind, source = "frames", args.frames
        else:
            kind, source = "projectors", args.projectors
        spec = JobSpec(
            source_kind=kind,
            source=source,
            n_steps=args.n_steps,
            rank_tol=args.rank_tol,
            oracles=tuple(args.oracle),
            t_total=args.t_total,
            n_time_steps=args.n_time_steps,
            output=args.output,
            plot_csv=args.plot_csv,
            energy_shift=args.energy_shift,
        )
    except OSError as exc:
        _err(exc)
        return EXIT_IO
    except (HolonomyError, KeyError, TypeError) as exc:
        _err(exc)
        return EXIT_USAGE
    code, _ = cmd_holonomy(spec)
    return code


if __name__ == "__main__":
    sys.exit(main())
