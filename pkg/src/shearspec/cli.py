"""Command line interface.

    shearspec {check,neutral,trace,census,scan,verify} --config run.ini
              [--out DIR] [--threads N] [--verbose]

Exit codes: 0 ok, 1 verification failure, 2 invalid profile or config,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import dispersion, modes, tracer, verify
from .config import RunConfig, load_config
from .errors import ConfigError, NumericalError, ProfileError
from .profile import parse_profile

EXIT_OK, EXIT_VERIFY, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2, 3
log = logging.getLogger("shearspec")


class _Ctx:
    def __init__(self, cfg: RunConfig, out: Path, threads: int):
        self.cfg = cfg
        self.out = out
        self.threads = threads
        self.opts = cfg.solver
        self.profile = parse_profile(cfg.expr, cfg.h)

    def map(self, fn, items):
        items = list(items)
        if self.threads <= 1 or len(items) <= 1:
            return [fn(x) for x in items]
        with ThreadPoolExecutor(max_workers=self.threads) as ex:
            return list(ex.map(fn, items))  # preserves input order

    def outdir(self) -> Path:
        self.out.mkdir(parents=True, exist_ok=True)
        (self.out / "effective_config.ini").write_text(self.cfg.to_ini())
        return self.out


# ------------------------------------------------------------- commands

def cmd_check(ctx: _Ctx) -> int:
    p = ctx.profile
    print(f"profile: {p.text}")
    print(f"h = {p.h!r}")
    print("monotone: yes")
    print(f"h0 = {p.h0!r}")
    print(f"U(-h) = {p.Umin!r}, U(0) = {p.Umax!r}")
    if not p.inflections:
        print("inflections: none")
    for inf in p.inflections:
        s = {1: ">0", -1: "<0", 0: "=0 (degenerate)"}[inf.sign_U3]
        print(f"inflection: x20 = {inf.x20!r}, c0 = {inf.c0!r}, U''' {s}")
    for x in p.degenerate_zeros:
        print(f"warning: U'' touches zero without changing sign near x2 = {x!r}")
    return EXIT_OK


def cmd_neutral(ctx: _Ctx) -> int:
    cfg = ctx.cfg
    rep = modes.neutral_modes(ctx.profile, cfg.g, cfg.sigma, ctx.opts, map_fn=ctx.map)
    out = ctx.outdir()
    lines = rep.lines()
    (out / "neutral_modes.txt").write_text("\n".join(lines) + "\n")
    rep.write_csv(out / "neutral_modes.csv")
    for line in lines:
        print(line)
    return EXIT_OK


def _trace_all(ctx: _Ctx) -> list[tracer.Branch]:
    cfg, p, opts = ctx.cfg, ctx.profile, ctx.opts
    g, sigma = cfg.g, cfg.sigma
    real = tracer._real_roots(p, g, sigma, cfg.k_min, opts)
    jobs = []
    above = [c for c in real if c > p.Umax]
    below = [c for c in real if c < p.Umin]
    if above:
        jobs.append(("c_plus", (cfg.k_min, complex(max(above))), cfg.k_max))
    if below:
        jobs.append(("c_minus_lower", (cfg.k_min, complex(min(below))), cfg.k_max))
    ks = tracer.k_seed(p, g)
    if cfg.k_max >= ks and sigma == 0.0:
        _, cm = tracer.seed_large_k(p, g, cfg.k_max, opts, check_k=False)
        jobs.append(("c_minus_upper", (cfg.k_max, cm.c), cfg.k_min))
    for inf in p.inflections:
        entry = modes.find_S(p, g, inf.c0, opts=opts)
        for k in entry.S:
            for target in (cfg.k_min, cfg.k_max):
                if k != target:
                    jobs.append(("inflection_branch", (k, complex(inf.c0)), target))

    def run(job):
        label, seed, target = job
        return tracer.trace_branch(p, g, sigma, seed, target, label,
                                   step_max=cfg.step_max, opts=opts)

    branches = ctx.map(run, jobs)
    # a segment seed whose branch never leaves the segment carries no information
    return [b for b in branches if len(b.points) > 1]


def cmd_trace(ctx: _Ctx) -> int:
    branches = _trace_all(ctx)
    out = ctx.outdir()
    tracer.write_branch_csv(branches, out / "branches.csv")
    for b in branches:
        p0, p1 = b.points[0], b.points[-1]
        print(f"{b.label}: {len(b.points)} points, k {p0.k:.6g} -> {p1.k:.6g}, "
              f"c {p0.c:.6g} -> {p1.c:.6g}, termination {b.termination_text()}")
    return EXIT_OK


def cmd_census(ctx: _Ctx) -> int:
    cfg = ctx.cfg
    cs = ctx.map(lambda k: tracer.mode_census(ctx.profile, cfg.g, cfg.sigma, k, ctx.opts),
                 cfg.k_list)
    out = ctx.outdir()
    tracer.write_census_csv(cs, out / "census.csv")
    for cz in cs:
        print(f"k={cz.k!r} index={cz.index_upper} unstable={len(cz.unstable)} "
              f"neutral={len(cz.neutral_nonsingular)} singular={len(cz.singular_neutral)}")
        for note in cz.flagged:
            print(f"  note: {note}")
    return EXIT_OK


def scan_grid(cfg: RunConfig, profile) -> tuple[np.ndarray, np.ndarray]:
    """k from census.k_list; c on a 41 x 6 grid over the semicircle window."""
    w = profile.spread
    cr = np.linspace(profile.Umin - 0.5 * w, profile.Umax + 0.5 * w, 41)
    ci = np.linspace(0.0, 0.5 * w, 6)
    cs = (cr[None, :] + 1j * ci[:, None]).ravel()
    return np.array(cfg.k_list, dtype=float), cs


def cmd_scan(ctx: _Ctx) -> int:
    cfg = ctx.cfg
    ks, cs = scan_grid(cfg, ctx.profile)
    rows = ctx.map(lambda k: dispersion.scan(ctx.profile, cfg.g, cfg.sigma, [k], cs,
                                             ctx.opts), ks)
    samples = [s for row in rows for s in row]
    out = ctx.outdir()
    dispersion.write_scan_csv(samples, out / "scan.csv")
    print(f"scan: {len(samples)} samples ({len(ks)} k x {len(cs)} c) -> {out / 'scan.csv'}")
    return EXIT_OK


def cmd_verify(ctx: _Ctx) -> int:
    cfg = ctx.cfg
    results = verify.run_checks(ctx.opts)
    try:
        branches = _trace_all(ctx)
        results += verify.census_branch_lines(ctx.profile, cfg.g, cfg.sigma, cfg.k_list,
                                              branches, ctx.opts, map_fn=ctx.map)
    except NumericalError as exc:
        results += [verify.CheckResult(f"census_branch k={k!r}", False, f"raised {exc}")
                    for k in cfg.k_list]
    out = ctx.outdir()
    lines = [r.line() for r in results]
    (out / "verify.txt").write_text("\n".join(lines) + "\n")
    for line in lines:
        print(line)
    n_fail = sum(not r.passed for r in results)
    print(f"{len(results) - n_fail}/{len(results)} checks passed")
    return EXIT_OK if n_fail == 0 else EXIT_VERIFY


COMMANDS = {"check": cmd_check, "neutral": cmd_neutral, "trace": cmd_trace,
            "census": cmd_census, "scan": cmd_scan, "verify": cmd_verify}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="shearspec",
                                 description="Spectra of free-surface shear flows.")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", required=True, help="INI run configuration")
    ap.add_argument("--out", help="output directory (overrides [output] dir)")
    ap.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                    help="worker threads for k-parallel work")
    ap.add_argument("--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        if args.out:
            cfg = replace(cfg, out_dir=args.out)
        out = Path(cfg.out_dir)
        ctx = _Ctx(cfg, out, max(1, args.threads))
    except (ConfigError, ProfileError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    log.debug("running %s with %d threads, output in %s", args.command, ctx.threads, ctx.out)
    try:
        return COMMANDS[args.command](ctx)
    except ProfileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
