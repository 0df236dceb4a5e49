"""Command-line pipeline: synthesize -> corrupt -> reconstruct -> render / verify."""

import argparse
import dataclasses
import json
import os
import re
import sys
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import verify as verify_mod
from .errors import ConfigurationError, DegenerateInput, DSMError
from .filter import DEFAULT_ALPHA, c_alpha, fit_filter_polynomial
from .geometry import FarFieldMatrix, Scatterer, WaveContext, analytic_farfield, born_farfield, make_directions
from .indicators import (
    KINDS,
    IndicatorData,
    SamplingGrid,
    evaluate_grid,
    hausdorff_to_truth,
    level_set,
    normalize,
    read_csv,
    sharpen,
    write_csv,
    write_pgm,
)
from .noise import NoiseSpec, corrupt
from .spectral import svd

PLANES = {"xy": (0, 1), "xz": (0, 2), "yz": (1, 2)}


@dataclass
class RunConfig:
    experiment: str = "run"
    shape: str | None = None
    R: float | None = None
    center: list | None = None
    n: float = 0.5
    k: float = 10.0
    M: int = 32
    quad_level: int = 48
    analytic: bool = False
    delta: list = field(default_factory=lambda: [0.05])
    seed: int = 1
    grid: str | None = None
    plane: str | None = None
    indicators: list = field(default_factory=lambda: ["dsm", "fdsm", "tdsm"])
    alpha: float = DEFAULT_ALPHA
    p: float = 1.0
    tau: float | None = None
    fm_cutoff: float = 1e-8
    out: str = "out"
    workers: int | None = None

    @property
    def dimension(self):
        return 3 if self.shape == "ball" else 2

    def scatterer(self):
        if self.shape is None:
            return None
        center = self.center or [0.0] * self.dimension
        return Scatterer(self.shape, self.n, self.R, tuple(center))

    def sampling_grid(self, dimension):
        if dimension == 3:
            spec = self.grid or "-2,2,-2,2,100,100"
            return SamplingGrid.parse(spec, axes=PLANES[self.plane or "yz"])
        return SamplingGrid.parse(self.grid or "-1,1,-1,1,100,100")

    def level(self, dimension):
        if self.tau is not None:
            return self.tau
        return 0.7 if dimension == 3 else 0.85


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


def _line_of(text, key):
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, m.start()) + 1 if m else "?"


def load_config(path):
    text = Path(path).read_text(encoding="utf-8")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}:{exc.lineno}: invalid JSON: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise ConfigurationError(f"{path}:1: config must be a JSON object")
    cfg = RunConfig()
    for key, value in raw.items():
        if key not in _FIELDS:
            raise ConfigurationError(f"{path}:{_line_of(text, key)}: unknown config key {key!r}")
        try:
            value = _coerce(key, value)
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(f"{path}:{_line_of(text, key)}: bad value for {key!r}: {exc}") from None
        setattr(cfg, key, value)
    return cfg


def _coerce(key, value):
    if value is None:
        return None
    if key in ("n", "k", "alpha", "p", "fm_cutoff", "R", "tau"):
        return float(value)
    if key in ("M", "quad_level", "seed", "workers"):
        if isinstance(value, float) and not value.is_integer():
            raise ValueError(f"expected an integer, got {value}")
        return int(value)
    if key == "delta":
        return [float(v) for v in (value if isinstance(value, list) else [value])]
    if key == "indicators":
        kinds = value.split(",") if isinstance(value, str) else list(value)
        kinds = [k.strip().lower() for k in kinds if k.strip()]
        unknown = [k for k in kinds if k not in KINDS]
        if unknown:
            raise ValueError(f"unknown indicator(s) {unknown}; choose from {', '.join(KINDS)}")
        return kinds
    if key == "center":
        return [float(v) for v in (value.split(",") if isinstance(value, str) else value)]
    if key == "plane" and value not in PLANES:
        raise ValueError(f"plane must be one of {sorted(PLANES)}")
    if key == "grid":
        SamplingGrid.parse(value)
    return value


def build_config(args):
    cfg = load_config(args.config) if getattr(args, "config", None) else RunConfig()
    for key in _FIELDS:
        value = getattr(args, key, None)
        if value is None or value is False:
            continue
        try:
            setattr(cfg, key, _coerce(key, value))
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(f"--{key.replace('_', '-')}: {exc}") from None
    return cfg


# -- subcommands ----------------------------------------------------------------


def cmd_synthesize(cfg):
    if cfg.shape is None:
        raise ConfigurationError("synthesize needs a shape (--shape or config 'shape')")
    t0 = time.perf_counter()
    scat = cfg.scatterer()
    ctx = WaveContext(scat.dimension, cfg.k)
    dirs = make_directions(scat.dimension, cfg.M)
    if scat.n == 1.0:
        warnings.warn("n = 1 means zero contrast: the far field is identically zero")
    if cfg.analytic:
        if scat.shape not in ("disk", "ball") or any(scat.center):
            raise ConfigurationError("--analytic only supports a centered disk or ball")
        F = analytic_farfield(scat.R, scat.n, ctx, dirs)
    else:
        F = born_farfield(scat, ctx, dirs, cfg.quad_level, workers=cfg.workers)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "farfield.json"
    F.save(path)
    print(f"synthesize: wrote {path} ({F.M}x{F.M}, {scat.shape}) in {time.perf_counter() - t0:.3f} s")
    return path


def cmd_corrupt(input_path, cfg, force=False):
    F = FarFieldMatrix.load(input_path)
    if F.is_noisy and not force:
        raise ConfigurationError(f"{input_path} is already noisy; pass --force to add noise again")
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for delta in cfg.delta:
        noisy = corrupt(F, NoiseSpec(delta, cfg.seed), allow_noisy=force)
        path = out / f"farfield_delta{delta:g}_seed{cfg.seed}.json"
        noisy.save(path)
        print(f"corrupt: wrote {path} (delta={delta:g}, seed={cfg.seed})")
        paths.append(path)
    return paths


def reconstruct(F, cfg, truth=None):
    """Run the requested indicators on one far-field matrix.

    Returns ``(report, grids)`` with normalized (and sharpened) grids keyed by kind.
    """
    t_start = time.perf_counter()
    dim = F.context.dimension
    t0 = time.perf_counter()
    decomp = svd(F)
    t_svd = time.perf_counter() - t0
    if decomp.norm == 0:
        raise DegenerateInput(
            "reconstruct: the far-field matrix is zero (s1 = 0); synthesize with contrast n != 1")
    t0 = time.perf_counter()
    poly = fit_filter_polynomial(cfg.alpha, decomp.norm)
    t_fit = time.perf_counter() - t0
    data = IndicatorData(F.context, F.dirs, matrix=F.entries, decomp=decomp, poly=poly,
                         fm_cutoff=cfg.fm_cutoff)
    grid = cfg.sampling_grid(dim)
    tau = cfg.level(dim)
    grids = {}
    per_kind = {}
    for kind in cfg.indicators:
        t0 = time.perf_counter()
        ig = sharpen(normalize(evaluate_grid(kind, data, grid, workers=cfg.workers)), cfg.p)
        elapsed = time.perf_counter() - t0
        grids[kind] = ig
        arg = ig.argmax_point()
        entry = {"wall_time": elapsed, "argmax": arg.tolist(), "tau": tau, "p": cfg.p,
                 "argmax_inside": None, "hausdorff": None}
        if truth is not None:
            z = grid.points(dim)[int(np.argmax(ig.values))]
            entry["argmax_inside"] = bool(truth.contains(z)[0])
            contour = level_set(ig, tau).contour
            if truth.dimension == 2 and contour.size:
                entry["hausdorff"] = hausdorff_to_truth(contour, truth)
        per_kind[kind] = entry
    report = {
        "experiment": cfg.experiment,
        "dimension": dim,
        "k": F.context.k,
        "M": F.M,
        "provenance": F.provenance,
        "s1": decomp.norm,
        "alpha": poly.alpha,
        "eps": poly.eps,
        "c": list(poly.c),
        "c_alpha": c_alpha(poly.alpha, poly.norm_f),
        "filter": poly.to_dict(),
        "grid": {"bounds": grid.bounds_str(), "nx": grid.nx, "ny": grid.ny, "axes": list(grid.axes)},
        "indicators": per_kind,
        "timings": {"svd": t_svd, "filter_fit": t_fit, "total": time.perf_counter() - t_start},
    }
    return report, grids


def cmd_reconstruct(input_path, cfg):
    F = FarFieldMatrix.load(input_path)
    truth = cfg.scatterer()
    report, grids = reconstruct(F, cfg, truth)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    for kind, ig in grids.items():
        csv_path, pgm_path = out / f"{kind}.csv", out / f"{kind}.pgm"
        write_csv(ig, csv_path)
        write_pgm(ig, pgm_path)
        report["indicators"][kind].update(csv=str(csv_path), pgm=str(pgm_path))
    report["input"] = str(input_path)
    report_path = out / "report.json"
    report_path.write_text(json.dumps(report, indent=2), encoding="utf-8")
    times = ", ".join(f"{k} {v['wall_time']:.3f} s" for k, v in report["indicators"].items())
    print(f"reconstruct: {times}; total {report['timings']['total']:.3f} s; report {report_path}")
    return report_path


def parse_seeds(text):
    seeds = []
    for part in str(text).split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..")
            seeds.extend(range(int(lo), int(hi) + 1))
        elif part:
            seeds.append(int(part))
    if not seeds:
        raise ConfigurationError(f"no seeds in {text!r}")
    return seeds


def cmd_verify(seeds, out, mu_scale=1.0, num_z=1000, M=64):
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    ok = True
    paths = []
    for seed in seeds:
        reports = verify_mod.run_suite(seed, M=M, num_z=num_z, mu_scale=mu_scale)
        path = out / f"verify_seed{seed}.json"
        payload = verify_mod.write_report(reports, path, seed=seed, mu_scale=mu_scale, M=M)
        paths.append(path)
        for r in reports:
            print(f"verify seed={seed} {r.name}: {'ok' if r.passed else 'FAIL'} "
                  f"(violations={r.violations}, worst_margin={r.worst_margin:.3e})")
        ok &= payload["passed"]
    if not ok:
        print(f"verify: violations found; see {', '.join(str(p) for p in paths)}", file=sys.stderr)
    return 0 if ok else 1


def cmd_render(input_path, output=None):
    ig = read_csv(input_path)
    output = Path(output) if output else Path(input_path).with_suffix(".pgm")
    write_pgm(ig, output)
    print(f"render: wrote {output}")
    return output


# -- argument parsing -------------------------------------------------------------


def _add_common(p):
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--out", help="output directory")
    p.add_argument("--workers", type=int, help="threads for grid evaluation (default: all cores)")


def _add_model(p):
    p.add_argument("--shape", choices=["disk", "ball", "pear", "star", "peanut2d"])
    p.add_argument("--R", type=float, help="radius for disk/ball")
    p.add_argument("--center", help="comma-separated center offset")
    p.add_argument("--n", type=float, help="refractive index")
    p.add_argument("--k", type=float, help="wavenumber")


def make_parser():
    parser = argparse.ArgumentParser(prog="dsmff", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synthesize", help="write a clean Born far-field matrix")
    _add_common(p)
    _add_model(p)
    p.add_argument("--M", type=int, help="number of directions")
    p.add_argument("--quad-level", dest="quad_level", type=int)
    p.add_argument("--analytic", action="store_true", help="closed form for a centered disk/ball")

    p = sub.add_parser("corrupt", help="add multiplicative noise")
    p.add_argument("input")
    _add_common(p)
    p.add_argument("--delta", help="noise level(s), comma-separated for a batch")
    p.add_argument("--seed", type=int)
    p.add_argument("--force", action="store_true", help="allow corrupting already-noisy data")

    p = sub.add_parser("reconstruct", help="evaluate indicators on a sampling grid")
    p.add_argument("input")
    _add_common(p)
    _add_model(p)
    p.add_argument("--indicators", help=f"comma-separated subset of {','.join(KINDS)}")
    p.add_argument("--alpha", type=float)
    p.add_argument("--p", type=float, help="sharpening power (>= 1)")
    p.add_argument("--tau", type=float, help="level for the contour")
    p.add_argument("--grid", help='"x_lo,x_hi,y_lo,y_hi,nx,ny"')
    p.add_argument("--plane", choices=sorted(PLANES), help="3D slice plane (default yz)")
    p.add_argument("--fm-cutoff", dest="fm_cutoff", type=float)
    p.add_argument("--experiment")

    p = sub.add_parser("verify", help="run the synthetic-operator bound checks")
    p.add_argument("--seeds", default="0")
    p.add_argument("--out", default="out/verify")
    p.add_argument("--mu-scale", type=float, default=1.0,
                   help="multiply the constructed mu (values > 1 are a negative control)")
    p.add_argument("--num-z", type=int, default=1000)
    p.add_argument("--M", type=int, default=64)

    p = sub.add_parser("render", help="convert an indicator CSV to PGM")
    p.add_argument("input")
    p.add_argument("--out", help="output .pgm path")
    return parser


def main(argv=None):
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "verify":
            return cmd_verify(parse_seeds(args.seeds), args.out, args.mu_scale, args.num_z, args.M)
        if args.command == "render":
            cmd_render(args.input, args.out)
            return 0
        if getattr(args, "delta", None) is not None:
            args.delta = [float(v) for v in args.delta.split(",")]
        try:
            cfg = build_config(args)
        except ConfigurationError as exc:
            parser.error(str(exc))
        if cfg.workers is None:
            cfg.workers = os.cpu_count() or 1
        if args.command == "synthesize":
            cmd_synthesize(cfg)
        elif args.command == "corrupt":
            cmd_corrupt(args.input, cfg, force=args.force)
        elif args.command == "reconstruct":
            cmd_reconstruct(args.input, cfg)
        return 0
    except (DSMError, OSError) as exc:
        print(f"dsmff {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
