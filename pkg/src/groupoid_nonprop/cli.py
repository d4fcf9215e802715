"""Command line: ``groupoid-nonprop run <config>`` and ``groupoid-nonprop inspect <file>``.

Exit codes:

== ==========================================================
0  success (every eps target met)
1  a target was missed or another verifier error occurred
2  configuration error (E_CONFIG)
3  model or groupoid file error (E_MODEL, E_BAD_MODEL)
4  the spectral gap hypothesis fails (E_HYPOTHESIS_FAILS)
5  no separating cutoff at the realized scale (E_NO_SEPARATION)
== ==========================================================

``GROUPOID_NONPROP_OUT`` overrides the configured output directory;
``--out`` overrides both.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__
from .boundary import build_compactified_groupoid
from .config import ExperimentConfig, load_config
from .errors import (
    BadModelError,
    ConfigError,
    HypothesisError,
    ModelFileError,
    NonpropError,
    SeparationError,
)
from .formats import load_groupoid, load_model, sniff
from .groupoid import orbit_decomposition, orbits, validate
from .verifier import LatticeSystem, check_hypothesis, run_experiment

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_MODEL, EXIT_HYPOTHESIS, EXIT_SEPARATION = 0, 1, 2, 3, 4, 5
OUT_ENV = "GROUPOID_NONPROP_OUT"
COLUMNS = ("run_id", "L", "eps_target", "E", "K_radius", "static_norm", "sweep_max", "gap", "runtime_s", "status")


def exit_code(err: BaseException) -> int:
    if isinstance(err, ConfigError):
        return EXIT_CONFIG
    if isinstance(err, (ModelFileError, BadModelError)):
        return EXIT_MODEL
    if isinstance(err, HypothesisError):
        return EXIT_HYPOTHESIS
    if isinstance(err, SeparationError):
        return EXIT_SEPARATION
    return EXIT_FAIL


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    with os.fdopen(fd, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _load_system(path: Path) -> LatticeSystem:
    if not path.exists():
        raise ModelFileError("file not found", path=str(path))
    return load_model(path)


def _row(run_id, L, eps, status, gap="", rep=None) -> dict:
    row = dict.fromkeys(COLUMNS, "")
    row.update(run_id=run_id, L=L, eps_target=repr(float(eps)), status=status, gap=gap if gap == "" else repr(float(gap)))
    if rep is not None:
        row.update(
            E=";".join(rep.E),
            K_radius=rep.K_radius,
            static_norm=repr(float(rep.static_norm)),
            sweep_max=repr(float(rep.sweep_max)),
            runtime_s=f"{rep.runtime_s:.3f}",
        )
    return row


def run(cfg: ExperimentConfig, out_dir: Path, seed: int | None = None, threads: int = 1) -> int:
    """Run every (L, eps) point of the ladder and write ``report.csv`` and ``series.json``."""
    log = logging.getLogger("groupoid_nonprop")
    system = _load_system(cfg.model)
    unknown = [n for n in cfg.quasi_orbit if n not in system.model.boundary]
    if unknown:
        raise ConfigError(f"quasi_orbit: unknown boundary points {unknown}", field="quasi_orbit")
    seed = cfg.seed if seed is None else seed
    Ls = cfg.truncation or (system.model.truncation,)
    jobs = [(L, eps) for L in Ls for eps in cfg.eps]
    rows, series, codes = [], {}, []

    try:
        gap = check_hypothesis(cfg.kappa, cfg.quasi_orbit, system, cfg.grid).gap
    except HypothesisError as exc:
        g = exc.details.get("gap", 0.0)
        rows = [_row(f"L{L}-eps{eps!r}", L, eps, exc.code, g) for L, eps in jobs]
        codes.append(EXIT_HYPOTHESIS)
        print(str(exc), file=sys.stderr)
    else:
        # warm the per-L eigensolves before fanning out
        for L in Ls:
            if not cfg.kappa.is_zero:
                system.decomposition(L, cfg.kappa.support)

        def one(job):
            L, eps = job
            run_id = f"L{L}-eps{eps!r}"
            try:
                rep = run_experiment(
                    system, cfg.kappa, cfg.quasi_orbit, eps, L, cfg.t_grid, cfg.probe_count, seed, run_id, cfg.allowance
                )
            except NonpropError as exc:
                return _row(run_id, L, eps, exc.code, gap), None, exit_code(exc), str(exc)
            status = "ok" if rep.met and rep.dominated else ("eps_missed" if not rep.met else "not_dominated")
            return _row(run_id, L, eps, status, gap, rep), rep, EXIT_OK if status == "ok" else EXIT_FAIL, None

        with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
            results = list(pool.map(one, jobs))
        for row, rep, code, msg in results:
            rows.append(row)
            codes.append(code)
            if msg:
                print(msg, file=sys.stderr)
            if rep is not None:
                series[rep.run_id] = {
                    "L": rep.L,
                    "eps_target": rep.eps_target,
                    "E": list(rep.E),
                    "K_radius": rep.K_radius,
                    "chain": rep.chain,
                    "allowance": rep.allowance,
                    "seed": rep.seed,
                    "t": rep.series["t"],
                    "max_over_probes": rep.series["max_over_probes"],
                }
                log.info("%s: static %.3e sweep %.3e", rep.run_id, rep.static_norm, rep.sweep_max)

    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    _atomic_write(out_dir / "report.csv", buf.getvalue())
    meta = {
        "model": system.name,
        "quasi_orbit": list(cfg.quasi_orbit),
        "kappa": [list(n) for n in cfg.kappa.nodes],
        "seed": seed,
        "runs": series,
    }
    _atomic_write(out_dir / "series.json", json.dumps(meta, indent=1, sort_keys=True) + "\n")
    sys.stdout.write(buf.getvalue())
    for c in (EXIT_HYPOTHESIS, EXIT_SEPARATION, EXIT_FAIL):
        if c in codes:
            return c
    return EXIT_OK


def _fmt_components(S) -> str:
    return " u ".join(f"[{a:.6g}, {b:.6g}]" for a, b in S.components())


def inspect(path: Path, out=None) -> int:
    out = sys.stdout if out is None else out
    if not path.exists():
        raise ModelFileError("file not found", path=str(path))
    kind = sniff(path)
    if kind == "groupoid":
        g = load_groupoid(path)
        out.write(f"groupoid: {path.name}\n")
        out.write(f"units: {g.n_units}\narrows: {g.n_arrows}\n")
        bad = validate(g)
        out.write("axioms: " + ("ok" if not bad else f"{len(bad)} violation(s), first: {bad[0].axiom}") + "\n")
        orbs = orbits(g)
        out.write(f"orbits: {len(orbs)}\n")
        for o in orbs:
            o = sorted(o, key=g.unit_index.__getitem__)
            iso = len(g.isotropy(o[0]))
            kind = "trivial isotropy" if iso == 1 else f"isotropy of order {iso}"
            out.write(f"  {{{', '.join(o)}}}: {kind}\n")
        return EXIT_OK
    system = load_model(path)
    cm, bk = system.model, system.kernel
    n_pts = len(cm.points)
    R = cm.truncation
    ball = (2 * R + 1) ** cm.dim
    out.write(f"model: {system.name}\n")
    out.write(f"dimension: {cm.dim}  truncation: {cm.truncation}  core radius: {cm.core_radius}\n")
    out.write(f"units: {n_pts + len(cm.boundary)} ({n_pts} lattice points, {len(cm.boundary)} boundary)\n")
    out.write(f"arrows: {n_pts * n_pts + len(cm.boundary) * ball} (boundary isotropy truncated at radius {R})\n")
    if n_pts <= 64:
        # small enough to build the groupoid and check the orbit structure directly
        cg = build_compactified_groupoid(cm)
        orbit_decomposition(cg.groupoid, cg.main_orbit)
    out.write(f"orbits: main orbit of {n_pts} points with trivial isotropy")
    out.write("".join(f", {{{n}}}" for n in cm.boundary) + "\n")
    out.write(f"fiber map: {cm.fiber_map}\n")
    out.write(f"bandwidth: {bk.bandwidth}  convergence profile: {bk.profile}\n")
    for n in cm.boundary:
        S = system.symbol(n)
        out.write(f"boundary {n}: group Z^{cm.dim}, symbol spectrum {_fmt_components(S)} (grid step {S.step:.2g})\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="groupoid-nonprop", description="Localization experiments on band models.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true", help="log the inequality chain of every run")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run an experiment configuration")
    r.add_argument("config", type=Path)
    r.add_argument("--out", type=Path, help="output directory")
    r.add_argument("--seed", type=int, help="probe seed (overrides the configuration)")
    r.add_argument("--threads", type=int, default=1, help="parallel ladder points")
    i = sub.add_parser("inspect", help="summarize a model or groupoid file")
    i.add_argument("model", type=Path)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.command == "inspect":
            return inspect(args.model)
        cfg = load_config(args.config)
        out = args.out or (Path(os.environ[OUT_ENV]) if os.environ.get(OUT_ENV) else cfg.output)
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1", field="--threads")
        return run(cfg, out, args.seed, args.threads)
    except NonpropError as exc:
        print(str(exc), file=sys.stderr)
        return exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())
