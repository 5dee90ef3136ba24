"""Command line entry point: ``pmdimer {simulate,analytic,sweep,compare}``."""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import platform
import sys
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .config import ConfigError, RunConfig, config_hash, load_config
from .demod import DemodSettings, demodulate, spectrum
from .perturbation import analytic_spectrum
from .propagator import SignalGrid
from .sweep import absorptive_part, extract_peak, peak_height, run_sweep

log = logging.getLogger("pmdimer")


def _kappas(flag: str) -> tuple[int, ...]:
    return (1, 2) if flag == "both" else (int(flag),)


def _sha(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def cached_grid(rc: RunConfig, cache_dir: Path, workers: int) -> tuple[SignalGrid, bool]:
    """Signal grid from the cache, computing and storing it on a miss."""
    cache_dir.mkdir(parents=True, exist_ok=True)
    path = cache_dir / f"grid-{rc.grid_digest}.npz"
    if path.exists():
        with np.load(path) as z:
            grid = SignalGrid(z["t21"], z["tau"], z["values"], float(z["omega_21"]),
                              float(z["phi_21"]))
        return grid, True
    grid = rc.scenario.signal_grid(workers)
    tmp = path.with_suffix(".tmp.npz")
    np.savez(tmp, t21=grid.t21, tau=grid.tau, values=grid.values,
             omega_21=grid.omega_21, phi_21=grid.phi_21)
    tmp.replace(path)
    return grid, False


def write_grid_csv(grid: SignalGrid, path: Path):
    header = ",".join(["t21"] + [repr(float(t)) for t in grid.tau])
    data = np.column_stack([grid.t21, grid.values])
    np.savetxt(path, data, delimiter=",", header=header, comments="", fmt="%.17g")


def _simulate(rc, out, args, files):
    grid, hit = cached_grid(rc, Path(args.cache or out / "cache"), args.workers)
    log.info("signal grid %s", "loaded from cache" if hit else "computed")
    write_grid_csv(grid, out / "grid.csv")
    files.append("grid.csv")
    sc = rc.scenario
    for k in _kappas(args.kappa):
        d = demodulate(grid, DemodSettings(kappa=k, omega_M=sc.omega_M, mode=sc.demod_mode))
        spectrum(d, sc.window_sigma).to_csv(out / f"spectrum_k{k}.csv")
        sc.numeric_spectrum(grid, k).to_csv(out / f"spectrum_k{k}_bgsub.csv")
        files += [f"spectrum_k{k}.csv", f"spectrum_k{k}_bgsub.csv"]
    return {"cache_hit": hit}


def _analytic(rc, out, args, files):
    sc = rc.scenario
    bank = sc.bank()
    for k in _kappas(args.kappa):
        total = sc.analytic_spectrum(k, bank=bank, background="none")
        parts = {c: analytic_spectrum(sc.analytic_signal(k, bank), sc.window_sigma,
                                      total.omega, components=[c])
                 for c in sc.analytic_signal(k, bank).components}
        parts["total"] = total
        parts["total_bgsub"] = sc.analytic_spectrum(k, omega=total.omega, bank=bank)
        name = f"analytic_k{k}.csv"
        with open(out / name, "w") as fh:
            fh.write("omega,re,im,component\n")
            for comp, spec in parts.items():
                for om, v in zip(spec.omega, spec.values):
                    fh.write(f"{om!r},{v.real!r},{v.imag!r},{comp}\n")
        files.append(name)
    return {}


def _sweep(rc, out, args, files):
    if rc.sweep is None:
        raise ConfigError("sweep needs sweep.axis and sweep.values", ["sweep.axis"])
    spec = rc.sweep
    if args.route:
        spec.route = args.route
    table = run_sweep(spec, workers=args.workers, kappas=_kappas(args.kappa))
    table.to_csv(out / "peaks.csv")
    files.append("peaks.csv")
    return {}


def _compare(rc, out, args, files):
    sc = rc.scenario
    kappas = _kappas(args.kappa)
    grid, hit = cached_grid(rc, Path(args.cache or out / "cache"), args.workers)
    bank = sc.bank()
    rows = []
    for k in kappas:
        num = sc.numeric_spectrum(grid, k)
        ana = sc.analytic_spectrum(k, bank=bank)
        for label, om in sc.predicted(k).items():
            part = absorptive_part(label)
            wn, vn = extract_peak(num, om, part=part)
            wa, va = extract_peak(ana, om, part=part)
            hn, ha = peak_height(label, vn), peak_height(label, va)
            dev = (hn - ha) / abs(ha) if ha != 0 else float("nan")
            rows.append((label, wn, wa, hn, ha, dev))
    with open(out / "compare.csv", "w") as fh:
        fh.write("label,omega_numeric,omega_analytic,height_numeric,height_analytic,rel_dev\n")
        for r in rows:
            fh.write(",".join([r[0]] + [repr(float(x)) for x in r[1:]]) + "\n")
    files.append("compare.csv")
    return {"cache_hit": hit, "max_rel_dev": max(abs(r[5]) for r in rows)}


COMMANDS = {"simulate": _simulate, "analytic": _analytic, "sweep": _sweep, "compare": _compare}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pmdimer", description=__doc__)
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", type=Path, help="JSON config or emitted manifest")
    p.add_argument("--out", type=Path, default=Path("out"))
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--full-grid", action="store_true",
                   help="4500 delays and a window of 500 instead of the reduced grid")
    p.add_argument("--route", choices=["numeric", "analytic", "both"])
    p.add_argument("--kappa", choices=["1", "2", "both"], default="both")
    p.add_argument("--cache", type=Path, help="grid cache directory (default OUT/cache)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def run(args) -> int:
    rc = load_config(args.config, full_grid=args.full_grid)
    if args.workers < 1:
        raise ConfigError("--workers must be at least 1", ["--workers"])
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    files: list[str] = []
    extra = COMMANDS[args.command](rc, out, args, files)
    manifest = {
        "command": args.command,
        "kappa": args.kappa,
        "route": args.route,
        "config": rc.resolved,
        "config_hash": config_hash(rc.resolved),
        "versions": {"pmdimer": __version__, "numpy": np.__version__,
                     "scipy": scipy.__version__, "python": platform.python_version()},
        "outputs": {f: _sha(out / f) for f in files},
        **extra,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return run(args)
    except ConfigError as exc:
        err = {"error": "config", "message": str(exc), "offenders": exc.offenders}
        print(json.dumps(err), file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - report any failure as structured output
        err = {"error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(err), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
