"""Batch front-end.

    relaxprc --config fhn_impulse.cfg --command prc-singular --out out/

Commands write CSV files (and an SVG for ``plot``) into the output
directory. Data files contain no timestamps; run metadata goes to a
``<prefix>run-<command>.json`` sidecar. On failure one JSON object per
error is written to stderr and the exit status is nonzero.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import warnings
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig, load_config
from .errors import ConfigError, MonodromyIllConditioned, OnSeparatrix, RelaxPrcError, \
    ValidationError, BranchOutOfDomain
from .model import Branch, branch_solve, fold_points
from .numeric import convolve_iprc, error_sweep, find_limit_cycle, iprc_adjoint, prc_numeric
from .singular import TWO_PI, PrcCurve, build_orbit, phase_of, prc_singular
from .svgplot import Series, render

COMMANDS = ("geometry", "prc-singular", "prc-numeric", "prc-infinitesimal", "sweep",
            "isochrones", "plot")
PRC_HEADER = ("theta", "shift", "method", "epsilon")


def fmt(v) -> str:
    if isinstance(v, str):
        return v
    if v is None:
        return ""
    v = float(v)
    if math.isnan(v):
        return "nan"
    return f"{v:.15g}"


def write_csv(path: Path, header, rows) -> Path:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def prc_rows(curve: PrcCurve):
    for th, sh in zip(curve.theta, curve.shift):
        yield (th, sh, curve.method, curve.epsilon)


def read_prc_csv(path: Path) -> dict[tuple[str, float], tuple[list, list]]:
    curves: dict = {}
    with open(path, newline="", encoding="utf-8") as fh:
        r = csv.DictReader(fh)
        for row in r:
            key = (row["method"], float(row["epsilon"]))
            th, sh = curves.setdefault(key, ([], []))
            th.append(float(row["theta"]))
            sh.append(float(row["shift"]))
    return curves


class Runner:
    def __init__(self, cfg: RunConfig, out: Path, threads: int = 1):
        self.cfg = cfg
        self.out = out
        self.threads = threads
        self.written: list[Path] = []

    def path(self, name: str) -> Path:
        return self.out / f"{self.cfg.output.prefix}{name}"

    def emit(self, name, header, rows):
        self.written.append(write_csv(self.path(name), header, rows))

    def signal(self):
        if self.cfg.input is None:
            raise ValidationError("input", "section is required for this command")
        return self.cfg.input.signal()

    def epsilon(self) -> float:
        if self.cfg.model.epsilon is None:
            raise ValidationError("model.epsilon", "required for this command")
        return self.cfg.model.epsilon

    def shift_kwargs(self):
        n = self.cfg.numerics
        return dict(rtol=n.rtol, atol=n.atol, horizon_periods=n.horizon)

    # -- commands -----------------------------------------------------------

    def geometry(self):
        geom = fold_points(self.cfg.model.system())
        orbit = build_orbit(geom)
        zm, zp = geom.z_minus, geom.z_plus
        rows = [
            ("lower_fold", geom.lower_fold[0], zm, None),
            ("upper_fold", geom.upper_fold[0], zp, None),
            ("landing_lower_jump", branch_solve(geom, zm, Branch.UPPER), zm, None),
            ("landing_upper_jump", branch_solve(geom, zp, Branch.LOWER), zp, None),
            ("period_slow", None, None, orbit.period_slow),
            ("dtau_plus", None, None, orbit.dtau_plus),
            ("dtau_minus", None, None, orbit.dtau_minus),
            ("theta_plus", None, None, orbit.theta_plus),
            ("omega_slow", None, None, orbit.omega_slow),
        ]
        self.emit("geometry.csv", ("name", "x", "z", "value"), rows)

    def prc_singular(self):
        orbit = build_orbit(fold_points(self.cfg.model.system()))
        curve = prc_singular(orbit, self.signal(), self.cfg.numerics.singular_samples)
        self.emit("prc_singular.csv", PRC_HEADER, prc_rows(curve))

    def prc_numeric(self):
        sys_e = self.cfg.model.system(self.epsilon())
        curve = prc_numeric(sys_e, self.signal(), self.cfg.numerics.samples,
                            threads=self.threads, **self.shift_kwargs())
        self.emit("prc_numeric.csv", PRC_HEADER, prc_rows(curve))

    def prc_infinitesimal(self):
        sys_e = self.cfg.model.system(self.epsilon())
        cycle = find_limit_cycle(sys_e)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", MonodromyIllConditioned)
            iprc = iprc_adjoint(sys_e, cycle, self.cfg.numerics.iprc_samples)
        self.emit("iprc.csv", ("theta", "q", "q_z", "epsilon"),
                  ((t, q, qz, iprc.epsilon) for t, q, qz in zip(iprc.theta, iprc.q, iprc.q_z)))
        curve = convolve_iprc(iprc, self.signal())
        self.emit("prc_infinitesimal.csv", PRC_HEADER, prc_rows(curve))

    def sweep(self):
        model = self.cfg.model
        if len(model.epsilons) < 3:
            raise ValidationError("model.epsilons", "sweep needs at least three values")
        n = self.cfg.numerics
        rep = error_sweep(model.system(), model.epsilons, self.signal(), n.samples,
                          band=n.band, threads=self.threads, iprc_samples=n.iprc_samples,
                          **self.shift_kwargs())
        rows = [(e, es, ei, None) for e, es, ei in
                zip(rep.epsilons, rep.sup_error_singular, rep.sup_error_infinitesimal)]
        rows.append((None, None, None, rep.beta_hat))
        self.emit("sweep.csv",
                  ("epsilon", "sup_error_singular", "sup_error_infinitesimal", "beta_hat"), rows)
        self.emit("sweep_periods.csv",
                  ("epsilon", "period_fast", "period_slow", "period_slow_singular",
                   "anchor_z_offset"),
                  ((e, tf, ts, rep.period_slow_singular, az) for e, tf, ts, az in
                   zip(rep.epsilons, rep.period_fast, rep.period_slow, rep.anchor_z_offset)))
        curves = [rep.singular, *rep.numeric, *rep.infinitesimal]
        self.emit("sweep_curves.csv", PRC_HEADER,
                  (row for c in curves for row in prc_rows(c)))

    def isochrones(self):
        geom = fold_points(self.cfg.model.system())
        orbit = build_orbit(geom)
        zm, zp = geom.z_minus, geom.z_plus
        dz = zp - zm
        x_lo = branch_solve(geom, zp, Branch.LOWER) - 0.5
        x_hi = branch_solve(geom, zm, Branch.UPPER) + 0.5
        n = self.cfg.numerics.grid
        xs = np.linspace(x_lo, x_hi, n)
        zs = np.linspace(zm - 0.5 * dz, zp + 0.5 * dz, n)
        rows = []
        for z in zs:
            for x in xs:
                try:
                    th = phase_of(orbit, x, z)
                except (OnSeparatrix, BranchOutOfDomain):
                    th = float("nan")
                rows.append((x, z, th))
        self.emit("isochrones.csv", ("x", "z", "theta"), rows)

    def plot(self):
        sing = self.path("prc_singular.csv")
        if not sing.exists():
            raise ValidationError("plot", f"{sing.name} not found; run prc-singular first")
        series = []
        for (method, eps), (th, sh) in sorted(read_prc_csv(sing).items()):
            series.append(Series(th, sh, "line", "singular", "#000000", break_jumps=0.3))
        extra = [("prc_numeric.csv", "dots"), ("prc_infinitesimal.csv", "line"),
                 ("sweep_curves.csv", None)]
        for name, kind in extra:
            p = self.path(name)
            if not p.exists():
                continue
            for (method, eps), (th, sh) in sorted(read_prc_csv(p).items()):
                if method == "singular":
                    continue
                k = kind or ("dots" if method == "numeric" else "line")
                series.append(Series(th, sh, k, f"{method} eps={eps:g}",
                                     break_jumps=0.3 if k == "line" else None))
        sig = self.signal().describe() if self.cfg.input is not None else ""
        svg = render(series, title=f"Phase response curve {sig}", xlabel="phase theta (rad)",
                     ylabel="phase shift (rad)", xlim=(0.0, TWO_PI))
        p = self.path("prc.svg")
        p.write_text(svg, encoding="utf-8")
        self.written.append(p)

    def run(self, command: str):
        if command not in COMMANDS:
            raise ValidationError("command", f"unknown command {command!r}; "
                                             f"expected one of {', '.join(COMMANDS)}")
        self.out.mkdir(parents=True, exist_ok=True)
        getattr(self, command.replace("-", "_"))()
        return self.written


def run(cfg: RunConfig, command: str, out: str | Path | None = None, threads: int = 1) -> list[Path]:
    """Execute ``command`` for ``cfg``; returns the paths written."""
    out = Path(out if out is not None else cfg.output.dir)
    return Runner(cfg, out, threads).run(command)


def _error_record(exc: BaseException, command: str | None) -> str:
    rec = {"error": type(exc).__name__, "message": str(exc), "command": command}
    for attr in ("line", "field"):
        if getattr(exc, attr, None) is not None:
            rec[attr] = getattr(exc, attr)
    return json.dumps(rec, sort_keys=True)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="relaxprc", description=__doc__.split("\n\n")[0])
    ap.add_argument("--config", required=True, help="run configuration file")
    ap.add_argument("--command", required=True, choices=COMMANDS)
    ap.add_argument("--out", default=None, help="output directory (overrides [output] dir)")
    ap.add_argument("--threads", type=int, default=1, help="worker processes, 0 = one per CPU")
    args = ap.parse_args(argv)
    if args.threads < 0:
        ap.error("--threads must be >= 0")
    try:
        cfg = load_config(args.config)
        out = Path(args.out if args.out is not None else cfg.output.dir)
        written = run(cfg, args.command, out, args.threads)
    except (RelaxPrcError, ValueError, OSError) as exc:
        print(_error_record(exc, args.command), file=sys.stderr)
        return 2 if isinstance(exc, ConfigError) else 1
    meta = {
        "command": args.command,
        "config": str(args.config),
        "config_text": cfg.to_text(),
        "files": [p.name for p in written],
        "threads": args.threads,
        "version": __version__,
        "finished_utc": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    sidecar = out / f"{cfg.output.prefix}run-{args.command}.json"
    sidecar.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    for p in written:
        print(p)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
