"""Command-line interface.

Subcommands::

    preprocess   propagate bundle features, write a DGCF cache file
    train        train the softmax classifier, emit a JSON report
    sweep        retrain across a T / K / sigma grid, emit CSV
    noise        seed-averaged robustness comparison vs. the coupled
                 baseline under feature noise, emit CSV
    verify       run the numerical invariant suite, emit CSV, exit 1 on
                 any violation
    risk         synthetic corrupted-SBM recovery sweep, emit CSV
    bench        median preprocess/train wall times per config, emit CSV

Exit codes: 0 success, 1 verification failure, 2 usage or I/O error.
All commands are deterministic given their flags and seed; timing columns
are exempt.
"""
from __future__ import annotations

import argparse
import sys
import time

from .classifier import TrainConfig, save_model, train, tune_weight_decay
from .data import SbmConfig, load_bundle
from .diffusion import (
    SCHEMES,
    DiffusionConfig,
    propagate,
    read_feature_cache,
    write_feature_cache,
)
from .errors import DGCError
from .graphcore import VARIANTS, normalize
from .harness import (
    BENCH_HEADER,
    NOISE_HEADER,
    RISK_HEADER,
    SWEEP_HEADER,
    SweepSpec,
    run_bench,
    run_noise,
    run_risk,
    run_sweep,
)
from .verify import run_verification


def _add_diffusion_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scheme", choices=SCHEMES, default="euler",
                   help="propagation scheme (default: euler)")
    p.add_argument("--laplacian", choices=VARIANTS, default="aug", dest="variant",
                   help="Laplacian variant: aug = self-loop augmented (default), "
                        "sym = plain symmetric normalization")
    p.add_argument("--T", type=float, default=None, dest="t",
                   help="terminal diffusion time (ignored for sgc, where T = K)")
    p.add_argument("--K", type=int, default=None, dest="k",
                   help="number of propagation steps")


def _add_train_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--lr", type=float, default=0.2, help="learning rate (default 0.2)")
    p.add_argument("--epochs", type=int, default=100, help="training epochs (default 100)")
    p.add_argument("--weight-decay", type=float, default=None,
                   help="L2 penalty on the weight matrix (bias is never decayed)")
    p.add_argument("--wd-grid", action="store_true",
                   help="grid-tune weight decay on validation accuracy instead "
                        "of passing --weight-decay")
    p.add_argument("--optimizer", choices=("adam", "gd"), default="adam")
    p.add_argument("--seed", type=int, default=0,
                   help="seed for noise injection; training itself is seed-free")
    p.add_argument("--no-bias", action="store_true",
                   help="drop the classifier bias term")


def _diffusion_config(args) -> DiffusionConfig:
    if args.scheme == "sgc":
        if args.k is None:
            raise DGCError("sgc needs --K")
        return DiffusionConfig("sgc", args.variant, k=args.k)
    if args.t is None or args.k is None:
        raise DGCError(f"{args.scheme} needs both --T and --K")
    return DiffusionConfig(args.scheme, args.variant, t=args.t, k=args.k)


def _train_config(args, weight_decay: float = 0.0) -> TrainConfig:
    return TrainConfig(
        learning_rate=args.lr,
        epochs=args.epochs,
        weight_decay=weight_decay,
        optimizer=args.optimizer,
        seed=args.seed,
        use_bias=not args.no_bias,
    )


def _resolve_wd(args, feats, dataset, base_cfg: TrainConfig) -> float:
    if args.weight_decay is not None and args.wd_grid:
        raise DGCError("pass either --weight-decay or --wd-grid, not both")
    if args.weight_decay is not None:
        return args.weight_decay
    if args.wd_grid:
        best, _ = tune_weight_decay(feats, dataset, base_cfg)
        return best
    return 0.0


def _write_text(out: str | None, text: str) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)


def _csv(header: str, rows: list[dict], fmt: dict[str, str]) -> str:
    lines = [header]
    for row in rows:
        lines.append(",".join(fmt.get(col, "{}").format(row[col])
                              for col in header.split(",")))
    return "\n".join(lines) + "\n"


def _parse_values(text: str, integer: bool = False) -> tuple:
    """Either an explicit comma list or an inclusive start:stop:step range."""
    if ":" in text:
        start, stop, step = (float(v) for v in text.split(":"))
        if step <= 0:
            raise DGCError("range step must be > 0")
        values = []
        v = start
        while v <= stop + 1e-9:
            values.append(round(v, 10))
            v += step
    else:
        values = [float(v) for v in text.split(",") if v]
    if integer:
        return tuple(int(v) for v in values)
    return tuple(values)


def cmd_preprocess(args) -> int:
    dataset = load_bundle(args.data)
    cfg = _diffusion_config(args)
    prop = normalize(dataset.graph, cfg.variant)
    start = time.perf_counter()
    feats = propagate(dataset.features, prop, cfg)
    elapsed_ms = (time.perf_counter() - start) * 1000.0
    write_feature_cache(args.out, feats, cfg)
    if args.features_csv:
        # plain-text dump for external embedding/plotting tools
        with open(args.features_csv, "w", encoding="utf-8", newline="\n") as f:
            f.write("node,label," + ",".join(
                f"x{j}" for j in range(feats.shape[1])) + "\n")
            for i, row in enumerate(feats):
                f.write(f"{i},{dataset.labels[i]}," +
                        ",".join(repr(float(v)) for v in row) + "\n")
    print(f"preprocess_ms {elapsed_ms:.3f}")
    print(f"wrote {args.out} ({feats.shape[0]} x {feats.shape[1]}, {cfg.describe()})")
    return 0


def cmd_train(args) -> int:
    dataset = load_bundle(args.data)
    if args.cache:
        feats, cfg = read_feature_cache(args.cache)
        if feats.shape[0] != dataset.n:
            raise DGCError(
                f"cache has {feats.shape[0]} rows but bundle has {dataset.n} nodes"
            )
        preprocess_ms = 0.0
    else:
        cfg = _diffusion_config(args)
        prop = normalize(dataset.graph, cfg.variant)
        start = time.perf_counter()
        feats = propagate(dataset.features, prop, cfg)
        preprocess_ms = (time.perf_counter() - start) * 1000.0
    wd = _resolve_wd(args, feats, dataset, _train_config(args))
    model, report = train(feats, dataset, _train_config(args, wd),
                          preprocess_ms=preprocess_ms)
    report.config["diffusion"] = {"scheme": cfg.scheme, "variant": cfg.variant,
                                  "T": cfg.t, "K": cfg.k}
    if args.save_model:
        save_model(args.save_model, model)
    _write_text(args.out, report.to_json())
    return 0


def cmd_sweep(args) -> int:
    dataset = load_bundle(args.data)
    values = _parse_values(args.values, integer=args.param == "K")
    # the swept parameter needs no flag; pin the fixed config (and the
    # weight-decay tuning point) at the first swept value unless given
    if args.param == "K" and args.k is None:
        args.k = int(values[0])
    if args.param == "T" and args.t is None:
        args.t = float(values[0])
    fixed = _diffusion_config(args)
    spec = SweepSpec(parameter=args.param, values=values, fixed=fixed)
    if args.retune_wd:
        wd = 0.0  # re-tuned at every sweep point
    else:
        feats = propagate(dataset.features, normalize(dataset.graph, fixed.variant), fixed)
        wd = _resolve_wd(args, feats, dataset, _train_config(args))
    rows = run_sweep(dataset, spec, _train_config(args, wd), noise_seed=args.seed,
                     retune_wd=args.retune_wd)
    text = _csv(SWEEP_HEADER, rows, {
        "value": "{:g}", "val_acc": "{:.6f}", "test_acc": "{:.6f}",
        "preprocess_ms": "{:.3f}", "train_ms": "{:.3f}",
    })
    _write_text(args.out, text)
    return 0


def cmd_noise(args) -> int:
    dataset = load_bundle(args.data)
    dgc_cfg = _diffusion_config(args)
    sgc_cfg = DiffusionConfig("sgc", args.variant, k=args.sgc_k)
    sigmas = _parse_values(args.sigmas)
    base = _train_config(args)
    if args.wd_grid:
        prop = normalize(dataset.graph, dgc_cfg.variant)
        dgc_wd, _ = tune_weight_decay(propagate(dataset.features, prop, dgc_cfg),
                                      dataset, base)
        prop_s = prop if sgc_cfg.variant == dgc_cfg.variant else normalize(
            dataset.graph, sgc_cfg.variant)
        sgc_wd, _ = tune_weight_decay(propagate(dataset.features, prop_s, sgc_cfg),
                                      dataset, base)
    else:
        dgc_wd = sgc_wd = args.weight_decay if args.weight_decay is not None else 0.0
    rows = run_noise(
        dataset, sigmas, dgc_cfg, sgc_cfg,
        _train_config(args, dgc_wd), _train_config(args, sgc_wd),
        n_seeds=args.noise_seeds, seed_base=args.seed,
    )
    text = _csv(NOISE_HEADER, rows, {
        "sigma": "{:g}", "dgc_val_acc": "{:.6f}", "dgc_test_acc": "{:.6f}",
        "sgc_val_acc": "{:.6f}", "sgc_test_acc": "{:.6f}",
    })
    _write_text(args.out, text)
    return 0


def cmd_verify(args) -> int:
    report = run_verification(seed=args.seed)
    _write_text(args.out, report.to_csv())
    if not report.all_pass:
        for failure in report.failures:
            print(f"FAIL: {failure}", file=sys.stderr)
        return 1
    print("all checks passed", file=sys.stderr)
    return 0


def cmd_risk(args) -> int:
    sbm = SbmConfig(
        blocks=args.blocks,
        nodes_per_block=args.nodes_per_block,
        p_in=args.p_in,
        p_out=args.p_out,
        feature_dim=args.feature_dim,
        class_sep=args.class_sep,
        noise_sigma=args.noise_sigma,
        t_star=args.t_star,
        seed=args.seed,
    )
    grid = _parse_values(args.t_hat_grid)
    rows = run_risk(sbm, grid, k=args.k)
    text = _csv(RISK_HEADER, rows, {
        "t_hat": "{:g}", "val_acc": "{:.6f}", "test_acc": "{:.6f}", "risk": "{:.8f}",
    })
    _write_text(args.out, text)
    return 0


def cmd_bench(args) -> int:
    dataset = load_bundle(args.data)
    cfgs = []
    for spec in args.config:
        parts = spec.split(",")
        if len(parts) != 4:
            raise DGCError(f"--config wants scheme,variant,T,K; got {spec!r}")
        scheme, variant, t, k = parts
        cfgs.append(DiffusionConfig(scheme, variant, t=float(t), k=int(k)))
    if not cfgs:
        raise DGCError("bench needs at least one --config")
    wd = args.weight_decay if args.weight_decay is not None else 0.0
    rows = run_bench(dataset, cfgs, _train_config(args, wd), repeats=args.repeats)
    text = _csv(BENCH_HEADER, rows, {
        "T": "{:g}", "preprocess_ms": "{:.3f}", "train_ms": "{:.3f}",
        "total_ms": "{:.3f}",
    })
    _write_text(args.out, text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dgc",
        description="Decoupled graph convolution: heat-equation feature "
                    "propagation with independent terminal time and step count.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess", help="propagate features and write a DGCF cache")
    p.add_argument("--data", required=True, help="graph-bundle directory")
    _add_diffusion_flags(p)
    p.add_argument("--out", required=True, help="output cache file")
    p.add_argument("--features-csv", default=None,
                   help="also dump the propagated features as "
                        "node,label,x0..xd CSV (for external visualization)")
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("train", help="train the classifier, print a JSON report")
    p.add_argument("--data", required=True)
    p.add_argument("--cache", default=None, help="DGCF cache written by preprocess")
    _add_diffusion_flags(p)
    _add_train_flags(p)
    p.add_argument("--save-model", default=None, help="write a DGCM checkpoint here")
    p.add_argument("--out", default="-", help="report JSON path (default stdout)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("sweep", help="CSV: param,value,val_acc,test_acc,"
                                     "preprocess_ms,train_ms")
    p.add_argument("--data", required=True)
    p.add_argument("--param", required=True, choices=("T", "K", "sigma"))
    p.add_argument("--values", required=True,
                   help='comma list "2,4,8" or inclusive range "start:stop:step"')
    p.add_argument("--retune-wd", action="store_true",
                   help="grid-tune weight decay at every sweep point instead "
                        "of once at the fixed config")
    _add_diffusion_flags(p)
    _add_train_flags(p)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("noise", help="CSV: " + NOISE_HEADER)
    p.add_argument("--data", required=True)
    p.add_argument("--sigmas", required=True, help="noise standard deviations")
    p.add_argument("--sgc-k", type=int, default=2,
                   help="steps for the coupled baseline (default 2)")
    p.add_argument("--noise-seeds", type=int, default=5,
                   help="number of noise seeds averaged per sigma (default 5)")
    _add_diffusion_flags(p)
    _add_train_flags(p)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_noise)

    p = sub.add_parser("verify", help="run the numerical invariant suite; "
                                      "CSV of measured slopes and violation counts")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("risk", help="CSV: " + RISK_HEADER)
    p.add_argument("--blocks", type=int, default=3)
    p.add_argument("--nodes-per-block", type=int, default=60)
    p.add_argument("--p-in", type=float, default=0.2)
    p.add_argument("--p-out", type=float, default=0.02)
    p.add_argument("--feature-dim", type=int, default=16)
    p.add_argument("--class-sep", type=float, default=1.0)
    p.add_argument("--noise-sigma", type=float, default=0.1)
    p.add_argument("--t-star", type=float, default=2.0)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--t-hat-grid", default="0:4:0.1")
    p.add_argument("--K", type=int, default=256, dest="k",
                   help="integration steps per grid point (default 256)")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_risk)

    p = sub.add_parser("bench", help="CSV: " + BENCH_HEADER)
    p.add_argument("--data", required=True)
    p.add_argument("--config", action="append", default=[],
                   help="scheme,variant,T,K (repeatable)")
    p.add_argument("--repeats", type=int, default=5)
    _add_train_flags(p)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DGCError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
