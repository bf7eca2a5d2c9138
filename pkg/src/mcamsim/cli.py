"""Command-line entry point: ``mcamsim {build-lut,classify,fewshot,sweep-variation}``."""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from .bench.classify import BACKEND_NAMES, cam_config, nn_classify, parse_backend
from .bench.data import BUILTIN, load_builtin, load_csv, split
from .bench.fewshot import EpisodeSpec, SyntheticSpec, load_features, run_episode, synthetic_features
from .bench.report import RunReport
from .bench.sweep import ClassifyWorkload, FewShotWorkload, variation_sweep
from .cell import CamConfig, build_lut, distance_curve, lut_derivative_profile
from .device import DEVICE_KEYS, device_from_mapping, read_kv_file
from .errors import DatasetError, DomainError
from .svg import line_plot

OUTPUT_DIR_ENV = "MCAMSIM_OUTPUT_DIR"
CAM_KEYS = {"center_mv": "analog-inverse reflection voltage"}
RUN_KEYS = {"train_frac": "training fraction of each split", "lsh_seed": "LSH hyperplane seed"}
CONFIG_KEYS = {**DEVICE_KEYS, **CAM_KEYS, **RUN_KEYS}


class CliError(Exception):
    pass


def _load_config(path) -> dict[str, str]:
    if path is None:
        return {}
    conf = read_kv_file(path)
    unknown = sorted(set(conf) - set(CONFIG_KEYS))
    if unknown:
        raise CliError(f"{path}: unknown config key(s) {', '.join(unknown)}; "
                       f"known: {', '.join(sorted(CONFIG_KEYS))}")
    return conf


def _cam(bits: int, conf: dict) -> CamConfig:
    base = cam_config(bits)
    dev = {k: v for k, v in conf.items() if k in DEVICE_KEYS and k != "bits"}
    if "vth_levels_mv" in dev and len(dev["vth_levels_mv"].split(",")) != 2**bits:
        raise CliError(f"vth_levels_mv needs {2**bits} levels for {bits}-bit cells")
    device = device_from_mapping({**dev, "bits": str(bits)}, base.device) if dev else base.device
    center = float(conf.get("center_mv", base.center))
    return CamConfig(bits=bits, device=device, center=center)


def _cams(backends, conf) -> dict:
    return {b: _cam(parse_backend(b).bits, conf) for b in backends if parse_backend(b).kind == "mcam"}


def _out_dir(args) -> Path:
    d = Path(args.out or os.environ.get(OUTPUT_DIR_ENV) or "mcamsim_out")
    d.mkdir(parents=True, exist_ok=True)
    return d


def _write(path: Path, text: str) -> None:
    path.write_text(text)
    print(f"wrote {path}")


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _backends(text: str) -> list[str]:
    names = [b.strip() for b in text.split(",") if b.strip()]
    if not names:
        raise argparse.ArgumentTypeError("empty backend list")
    for b in names:
        try:
            parse_backend(b)
        except DomainError as e:
            raise argparse.ArgumentTypeError(str(e)) from None
    return names


def _sigmas(text: str) -> list[float]:
    try:
        vals = [float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"sigmas must be numbers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("sigma list is empty")
    if any(not v >= 0 for v in vals):
        raise argparse.ArgumentTypeError("sigmas must be >= 0")
    return vals


def _dataset(spec: str, label_column: str):
    if spec in BUILTIN:
        return load_builtin(spec)
    if not Path(spec).exists():
        raise CliError(f"dataset {spec!r} is neither a file nor one of {', '.join(BUILTIN)}")
    return load_csv(spec, label_column=label_column)


def _tag(args) -> str:
    return f"seed{args.seed}"


# ---- subcommands ---------------------------------------------------------

def cmd_build_lut(args, conf) -> int:
    cfg = _cam(args.bits, conf)
    lut = build_lut(cfg)
    config = {"cmd": "build-lut", "bits": args.bits, "conf": conf}
    rep = RunReport(f"conductance LUT, {args.bits}-bit", ("stored_state", "input_state", "distance", "G_uS"),
                    config, args.seed)
    h = rep.config_hash
    out = _out_dir(args)
    stem = f"lut_b{args.bits}"
    _write(out / f"{stem}.csv", lut.to_csv(comments=(f"config_hash={h} seed={args.seed}", f"bits={args.bits}")))
    _write(out / f"{stem}.json", lut.to_json(extra={"config_hash": h, "seed": args.seed, "center_mv": cfg.center,
                                                     "vth_levels_mv": list(cfg.device.vth_levels),
                                                     "dl_inputs_mv": list(cfg.dl_inputs)}))
    for s in range(lut.num_states):
        for i in range(lut.num_states):
            rep.rows.append((s, i, i - s, f"{lut.table[i, s]:.9g}"))
    _write(out / f"{stem}_series.csv", rep.to_csv())
    drv = RunReport("distance curve and finite-difference profile per stored state",
                    ("stored_state", "distance", "G_mean_uS", "dG_uS"), config, args.seed)
    for s in range(lut.num_states):
        for d, (g, dg) in enumerate(zip(distance_curve(lut, s), lut_derivative_profile(lut, s))):
            drv.rows.append((s, d, f"{g:.9g}", f"{dg:.9g}"))
    _write(out / f"{stem}_distance.csv", drv.to_csv())
    if args.svg:
        series = {f"S{s}": (range(len(distance_curve(lut, s))), distance_curve(lut, s))
                  for s in range(lut.num_states)}
        _write(out / f"{stem}_distance.svg",
               line_plot(series, f"cell conductance vs distance ({args.bits}-bit)", "distance", "G (uS)",
                         log_y=True, note=rep.header_lines()[1]))
    return 0


def cmd_classify(args, conf) -> int:
    train_frac = float(conf.get("train_frac", args.train_frac))
    lsh_seed = int(conf.get("lsh_seed", args.seed))
    cams = _cams(args.backends, conf)
    config = {"cmd": "classify", "datasets": args.datasets, "backends": args.backends,
              "train_frac": train_frac, "lsh_seed": lsh_seed, "label_column": args.label_column, "conf": conf}
    rep = RunReport("1-NN classification accuracy (%)", ("dataset", "backend", "accuracy", "n_train", "n_test"),
                    config, args.seed)
    per_backend: dict[str, list[float]] = {b: [] for b in args.backends}
    for spec in args.datasets:
        ds = _dataset(spec, args.label_column)
        tr, te = split(ds, train_frac, args.seed)
        for b in args.backends:
            acc = nn_classify(tr, te, b, cfg=cams.get(b), lsh_seed=lsh_seed)
            per_backend[b].append(acc)
            rep.add(ds.name, b, acc, tr.n_samples, te.n_samples)
    if len(args.datasets) > 1:
        for b in args.backends:
            rep.add("mean", b, float(np.mean(per_backend[b])), 0, 0)
    out = _out_dir(args)
    _write(out / f"classify_{_tag(args)}.csv", rep.to_csv())
    _write(out / f"classify_{_tag(args)}.txt", rep.summary())
    print(rep.summary(), end="")
    return 0


def _feature_pool(args):
    if args.features:
        return load_features(args.features, args.class_column), {"features": args.features}
    syn = SyntheticSpec(n_classes=args.synthetic_classes, per_class=args.synthetic_per_class,
                        feature_dim=args.dim, spread=args.spread, seed=args.synthetic_seed)
    return synthetic_features(syn), {"synthetic": syn.__dict__}


def _episode_spec(args, dim) -> EpisodeSpec:
    return EpisodeSpec(args.ways, args.shots, args.queries, args.episodes, dim, args.aggregation)


def cmd_fewshot(args, conf) -> int:
    pool, src = _feature_pool(args)
    dim = next(iter(pool.values())).shape[1]
    spec = _episode_spec(args, dim)
    lsh_seed = int(conf.get("lsh_seed", args.seed))
    cams = _cams(args.backends, conf)
    config = {"cmd": "fewshot", **src, "spec": spec.__dict__, "backends": args.backends,
              "lsh_seed": lsh_seed, "conf": conf}
    rep = RunReport("few-shot accuracy (%)", ("n_way", "k_shot", "backend", "accuracy", "episodes"),
                    config, args.seed)
    for b in args.backends:
        acc = run_episode(pool, spec, b, args.seed, cfg=cams.get(b), lsh_seed=lsh_seed)
        rep.add(spec.n_way, spec.k_shot, b, acc, spec.episodes)
    out = _out_dir(args)
    stem = f"fewshot_{spec.n_way}way_{spec.k_shot}shot_{_tag(args)}"
    _write(out / f"{stem}.csv", rep.to_csv())
    _write(out / f"{stem}.txt", rep.summary())
    print(rep.summary(), end="")
    return 0


def cmd_sweep_variation(args, conf) -> int:
    cfg = _cam(args.bits, conf)
    config = {"cmd": "sweep-variation", "workload": args.workload, "bits": args.bits, "sigmas": args.sigmas,
              "trials": args.trials, "truncation": args.truncation, "conf": conf}
    if args.workload == "classify":
        train_frac = float(conf.get("train_frac", args.train_frac))
        pairs = [split(_dataset(d, args.label_column), train_frac, args.seed) for d in args.datasets]
        work = ClassifyWorkload(pairs, args.bits, cfg)
        config.update(datasets=args.datasets, train_frac=train_frac)
    else:
        pool, src = _feature_pool(args)
        spec = _episode_spec(args, next(iter(pool.values())).shape[1])
        work = FewShotWorkload(pool, spec, args.seed, args.bits, cfg)
        config.update(src, spec=spec.__dict__)
    rep = RunReport(f"mcam{args.bits} accuracy (%) vs Vth sigma",
                    ("sigma_mv", "mean_acc", "std_acc", "trials", "nominal_acc"), config, args.seed)
    rows = variation_sweep(work, args.sigmas, args.trials, args.seed, args.truncation)
    for r in rows:
        rep.add(r.sigma, r.mean, r.std, r.trials, r.nominal)
    out = _out_dir(args)
    stem = f"sweep_{args.workload}_b{args.bits}_{_tag(args)}"
    _write(out / f"{stem}.csv", rep.to_csv())
    _write(out / f"{stem}.txt", rep.summary())
    if args.svg:
        _write(out / f"{stem}.svg", line_plot({"mean": ([r.sigma for r in rows], [r.mean for r in rows])},
                                              "accuracy vs Vth sigma", "sigma (mV)", "accuracy (%)",
                                              note=rep.header_lines()[1]))
    print(rep.summary(), end="")
    return 0


# ---- parser --------------------------------------------------------------

def _add_common(p):
    p.add_argument("--config", help="key = value file overriding device, cell and run defaults")
    p.add_argument("--out", help=f"output directory (default ${OUTPUT_DIR_ENV} or ./mcamsim_out)")
    p.add_argument("--seed", type=int, default=0, help="split / episode / trial seed (default 0)")


def _add_dataset_flags(p):
    p.add_argument("--label-column", default="label", help="label column for CSV files (default label)")
    p.add_argument("--train-frac", type=float, default=0.8)


def _add_fewshot_flags(p):
    src = p.add_mutually_exclusive_group()
    src.add_argument("--features", help="CSV: class column plus feature columns")
    src.add_argument("--synthetic", action="store_true", help="use Gaussian-cluster features (default)")
    p.add_argument("--class-column", default="class")
    p.add_argument("--ways", type=_positive_int, default=5)
    p.add_argument("--shots", type=_positive_int, default=1)
    p.add_argument("--queries", type=_positive_int, default=5)
    p.add_argument("--episodes", type=_positive_int, default=100)
    p.add_argument("--aggregation", choices=("rows", "prototype"), default="rows")
    d = SyntheticSpec()
    p.add_argument("--dim", type=_positive_int, default=d.feature_dim)
    p.add_argument("--spread", type=float, default=d.spread, help="within-class std (synthetic)")
    p.add_argument("--synthetic-classes", type=_positive_int, default=d.n_classes)
    p.add_argument("--synthetic-per-class", type=_positive_int, default=d.per_class)
    p.add_argument("--synthetic-seed", type=int, default=d.seed)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mcamsim", description="FeFET multi-bit CAM nearest-neighbour simulator")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("build-lut", help="write the cell conductance LUT and distance-curve series")
    p.add_argument("--bits", type=_positive_int, default=3)
    p.add_argument("--svg", action="store_true", help="also write an SVG of the distance curves")
    _add_common(p)
    p.set_defaults(func=cmd_build_lut)

    p = sub.add_parser("classify", help="1-NN classification accuracy per backend")
    p.add_argument("datasets", nargs="+", help=f"CSV path or built-in name ({', '.join(BUILTIN)})")
    p.add_argument("--backends", type=_backends, default=["mcam3", "mcam2", "tcam_lsh", "cosine", "euclidean"],
                   help=f"comma list from {', '.join(BACKEND_NAMES)}")
    _add_dataset_flags(p)
    _add_common(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("fewshot", help="N-way K-shot episode accuracy per backend")
    _add_fewshot_flags(p)
    p.add_argument("--backends", type=_backends, default=["mcam3", "mcam2", "tcam_lsh", "cosine", "euclidean"])
    _add_common(p)
    p.set_defaults(func=cmd_fewshot)

    p = sub.add_parser("sweep-variation", help="mcam accuracy vs device Vth sigma")
    p.add_argument("--workload", choices=("classify", "fewshot"), default="classify")
    p.add_argument("--datasets", type=lambda s: [d for d in s.split(",") if d], default=["iris", "wine"])
    p.add_argument("--bits", type=_positive_int, default=3)
    p.add_argument("--sigmas", type=_sigmas, default=[0.0, 20.0, 40.0, 60.0, 80.0])
    p.add_argument("--trials", type=_positive_int, default=50)
    p.add_argument("--truncation", type=float, default=None, help="redraw beyond this many sigmas")
    p.add_argument("--svg", action="store_true")
    _add_dataset_flags(p)
    _add_fewshot_flags(p)
    _add_common(p)
    p.set_defaults(func=cmd_sweep_variation)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        conf = _load_config(args.config)
        return args.func(args, conf)
    except (CliError, DomainError, DatasetError, OSError, ValueError) as e:
        msg = str(e).splitlines()[0] if str(e) else type(e).__name__
        print(f"mcamsim {args.cmd}: error: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
