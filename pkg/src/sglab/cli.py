"""Command line runner: ``sglab run|analyze|classify``.

Exit status: 0 success, 2 invalid input, 3 solver non-convergence.
"""

from __future__ import annotations

import argparse
import logging
import os
import platform
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np
import scipy
from threadpoolctl import threadpool_limits

from . import __version__
from .analysis import decay_ladder_scan, group_bubbles, mass_profile, oscillation_check, select_bubbles
from .config import ConfigError, ExperimentConfig, load_config
from .fields import CoefficientError, CoefficientPair, Field, FieldError, SnapshotError, read_snapshot, write_snapshot
from .grid import GridError, build_grid
from .io import ArtifactWriter, csv_text, dumps
from .liouville import synth_family
from .pohozaev import classify_quantization, pohozaev_consistency, pohozaev_report, sweep_csv
from .solver import MeanFieldProblem, continuation, effective_pair

log = logging.getLogger("sglab")

EXIT_OK, EXIT_INVALID, EXIT_NONCONVERGED = 0, 2, 3
JSON_FIELD_MAX_NODES = 4096
PROFILE_RADII = 24

_INPUT_ERRORS = (ConfigError, CoefficientError, SnapshotError, GridError, FieldError)


def worker_count() -> int:
    """Worker cap from ``SGLAB_THREADS`` (default: CPU count)."""
    raw = os.environ.get("SGLAB_THREADS")
    if raw is None or raw == "":
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"SGLAB_THREADS must be a positive integer, got {raw!r}", source="environment") from None
    if n < 1:
        raise ConfigError(f"SGLAB_THREADS must be a positive integer, got {raw!r}", source="environment")
    return n


# analysis pipeline -----------------------------------------------------------


def _disk_report(field: Field, pair: CoefficientPair, cfg: ExperimentConfig, disk):
    th = cfg.thresholds
    poh = pohozaev_report(field, pair, disk.center, disk.l, th.threshold_N)
    match = classify_quantization(max(poh.sigma1, 0.0), max(poh.sigma2, 0.0), th.m_max)
    r_min = min(0.5 * disk.l, 2.0 * disk.eps)
    radii = np.geomspace(r_min, disk.l, PROFILE_RADII)
    profile = mass_profile(field, pair, disk.center, radii)
    ladder = decay_ladder_scan(field, pair, disk.center, r_min, disk.l, th.threshold_N, PROFILE_RADII)
    return poh, match, profile, ladder


def analyze_field(field: Field, pair: CoefficientPair, cfg: ExperimentConfig, workers: int = 1) -> dict:
    """Select, group, measure masses, check Pohozaev, classify."""
    th = cfg.thresholds
    sel = select_bubbles(field, pair, th.c1_threshold)
    groups = group_bubbles(list(sel), th.ratio_tau, th.gap_factor)
    with ThreadPoolExecutor(max_workers=max(1, workers)) as ex:
        per_disk = list(ex.map(lambda d: _disk_report(field, pair, cfg, d), sel))
    osc = oscillation_check(field, sel, cfg.probes, cfg.seed)
    disks = []
    for d, (poh, match, _, _) in zip(sel, per_disk):
        disks.append({**d.to_dict(), "sigma1": poh.sigma1, "sigma2": poh.sigma2, "pohozaev": poh.to_dict(), "quantization": match.to_dict()})
    index = {id(d): k for k, d in enumerate(sel)}
    group_rows = []
    for gr in groups:
        ks = [index[id(m)] for m in gr.members]
        s1 = float(sum(per_disk[k][0].sigma1 for k in ks))
        s2 = float(sum(per_disk[k][0].sigma2 for k in ks))
        group_rows.append(
            {
                **gr.to_dict(),
                "disk_indices": ks,
                "sigma1": s1,
                "sigma2": s2,
                "pohozaev_consistency": pohozaev_consistency(max(s1, 0.0), max(s2, 0.0)),
                "quantization": classify_quantization(max(s1, 0.0), max(s2, 0.0), th.m_max).to_dict(),
            }
        )
    return {
        "selection": {"stop_reason": sel.stop_reason, "overflow": sel.overflow, "rejected": sel.rejected, "disks": disks},
        "groups": group_rows,
        "ladders": [p[3].to_dict() for p in per_disk],
        "profiles": [p[2] for p in per_disk],
        "oscillation": osc.to_dict(),
        "sweep": [(p[0].sigma1, p[0].sigma2, p[0].residual_identity) for p in per_disk],
    }


def write_analysis(out: ArtifactWriter, result: dict, m_max: int) -> None:
    out.json("bubbles.json", result["selection"])
    out.json("groups.json", result["groups"])
    out.json("ladder.json", result["ladders"])
    out.json("oscillation.json", result["oscillation"])
    for k, prof in enumerate(result["profiles"]):
        out.text(f"mass_profile_{k}.csv", prof.to_csv())
    out.text("quantization.csv", sweep_csv(result["sweep"], m_max))


def _store_field(out: ArtifactWriter, name: str, field: Field) -> None:
    write_snapshot(field, out.path(name + ".sgfld"))
    out.register(name + ".sgfld")
    if field.grid.n_r * field.grid.n_theta <= JSON_FIELD_MAX_NODES:
        out.json(name + ".json", field.to_json_dict())


# modes -----------------------------------------------------------------------


def _run_synthetic(cfg: ExperimentConfig, out: ArtifactWriter, workers: int, timings: dict) -> int:
    t = time.perf_counter()
    grid = build_grid(*cfg.grid)
    field = synth_family(cfg.family, grid)
    _store_field(out, "field", field)
    timings["build"] = time.perf_counter() - t
    t = time.perf_counter()
    write_analysis(out, analyze_field(field, cfg.pair(), cfg, workers), cfg.thresholds.m_max)
    timings["analysis"] = time.perf_counter() - t
    return EXIT_OK


def _run_continuation(cfg: ExperimentConfig, out: ArtifactWriter, workers: int, timings: dict) -> int:
    spec = cfg.continuation
    t = time.perf_counter()
    grid = build_grid(*cfg.grid)
    problem = MeanFieldProblem(grid, spec.H1, spec.H2)
    res = continuation(problem, spec.path, tol=spec.tol, max_iters=spec.max_iters, blowup_threshold=spec.blowup_threshold)
    timings["continuation"] = time.perf_counter() - t
    rows = []
    for k, (rep, u, flag) in enumerate(zip(res.reports, res.fields, res.blowup_flags)):
        out.json(f"solve_step_{k:03d}.json", {**rep.to_dict(), "blowup_flag": flag})
        _store_field(out, f"field_step_{k:03d}", u)
        m = {r: (s1, s2) for r, s1, s2 in rep.masses_at_radii}
        conc = m[0.1][0] / m[1.0][0] if 0.1 in m and 1.0 in m and m[1.0][0] > 0 else float("nan")
        rows.append((k, rep.rho1, rep.rho2, rep.converged, rep.newton_iters, rep.final_residual_norm, rep.sup_norm, flag, conc))
    out.text(
        "sup_norm.csv",
        csv_text(["step", "rho1", "rho2", "converged", "newton_iters", "residual", "sup_norm", "blowup_flag", "concentration"], rows),
    )
    out.json("continuation.json", {"path": [list(p) for p in spec.path], "completed_steps": len(res.reports), "failed_at": res.failed_at})
    if res.fields:
        t = time.perf_counter()
        last = res.fields[-1]
        rep = res.reports[-1]
        pair = effective_pair(problem.at(rep.rho1, rep.rho2), last)
        write_analysis(out, analyze_field(last, pair, cfg, workers), cfg.thresholds.m_max)
        timings["analysis"] = time.perf_counter() - t
    if res.failed_at is not None:
        log.error("continuation failed at step %d of %d", res.failed_at, len(spec.path))
        return EXIT_NONCONVERGED
    return EXIT_OK


def _run_snapshot(cfg: ExperimentConfig, snapshot: Path, out: ArtifactWriter, workers: int, timings: dict) -> int:
    field = read_snapshot(snapshot)
    t = time.perf_counter()
    write_analysis(out, analyze_field(field, cfg.pair(), cfg, workers), cfg.thresholds.m_max)
    timings["analysis"] = time.perf_counter() - t
    return EXIT_OK


def _output_root(cli_dir: Optional[str], cfg: ExperimentConfig) -> Path:
    root = Path(cli_dir or cfg.output_dir or "sglab-output")
    try:
        root.mkdir(parents=True, exist_ok=True)
        probe = root / ".write-test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise ConfigError(f"output directory {str(root)!r} is not writable: {exc}", source="output") from None
    return root


def run_experiment(cfg: ExperimentConfig, output_dir: Optional[str] = None, snapshot: Optional[str] = None, argv: Sequence[str] = ()) -> int:
    """Execute ``cfg`` and write artifacts plus ``manifest.json``."""
    workers = worker_count()
    cfg.pair()  # validate presets before touching the disk
    snap = Path(snapshot or cfg.snapshot) if (snapshot or cfg.snapshot) else None
    if snap is None and cfg.mode == "analyze-snapshot":
        raise ConfigError("analyze-snapshot mode needs a snapshot path", source=cfg.source)
    if snap is not None:
        read_snapshot(snap)  # fail before creating outputs
    out = ArtifactWriter(_output_root(output_dir, cfg))
    timings: dict = {}
    t0 = time.perf_counter()
    with threadpool_limits(limits=workers):
        if snap is not None:
            status = _run_snapshot(cfg, snap, out, workers, timings)
        elif cfg.mode == "synthetic":
            status = _run_synthetic(cfg, out, workers, timings)
        else:
            status = _run_continuation(cfg, out, workers, timings)
    timings["total"] = time.perf_counter() - t0
    manifest = {
        "tool": "sglab",
        "version": __version__,
        "command": list(argv),
        "exit_status": status,
        "config": cfg.to_dict(),
        "snapshot": None if snap is None else str(snap),
        "versions": {"python": platform.python_version(), "numpy": np.__version__, "scipy": scipy.__version__},
        "workers": workers,
        "timings_s": timings,
        "artifacts": out.listing(),
    }
    out.path("manifest.json").write_text(dumps(manifest), encoding="utf-8")
    return status


# entry point -----------------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sglab", description="Bubbling analysis for the sinh-Gordon equation on a disk.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output-dir", help="directory for artifacts (overrides the config)")
    common.add_argument("--quiet", action="store_true", help="only log warnings and errors")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", parents=[common], help="run an experiment config")
    r.add_argument("config")
    a = sub.add_parser("analyze", parents=[common], help="analyze a stored field snapshot")
    a.add_argument("snapshot")
    a.add_argument("--config", required=True)
    c = sub.add_parser("classify", parents=[common], help="nearest quantization point of a mass pair")
    c.add_argument("--sigma1", type=float, required=True)
    c.add_argument("--sigma2", type=float, required=True)
    c.add_argument("--m-max", type=int, default=50)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "classify":
            try:
                match = classify_quantization(args.sigma1, args.sigma2, args.m_max)
                cons = pohozaev_consistency(args.sigma1, args.sigma2)
            except ValueError as exc:
                print(f"error: {exc}", file=sys.stderr)
                return EXIT_INVALID
            sys.stdout.write(dumps({"sigma1": args.sigma1, "sigma2": args.sigma2, **match.to_dict(), "pohozaev_consistency": cons}))
            return EXIT_OK
        if args.command == "run":
            cfg = load_config(args.config)
            return run_experiment(cfg, args.output_dir, argv=argv)
        cfg = load_config(args.config)
        return run_experiment(cfg, args.output_dir, snapshot=args.snapshot, argv=argv)
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
