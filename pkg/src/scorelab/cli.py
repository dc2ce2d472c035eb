"""Command-line experiment runner.

Subcommands: analyze-errors, softlabel, train, eval, compare. Every run
writes a manifest echoing the fully resolved configuration; reports are
JSON/JSON-lines plus CSV, with figures rendered next to the delimited
output. Identical flags, inputs, and seeds produce byte-identical reports.

Flag resolution order: explicit flag > --config file entry > built-in
default.
"""

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import figures
from .conversion import (
    GaussianRating,
    deqa_enhance,
    deqa_raw_soft_label,
    label_moments,
)
from .core import DomainError, ParseError, TrainingError
from .data import GENERATORS, SynthSpec, generate_synthetic, load_csv, normalize_mos, split
from .error_analysis import (
    deqa_label_error,
    deqa_midpoint_bound,
    deqa_sigma_restoration_study,
    qalign_error_mc,
    uat_demo,
    UAT_TARGETS,
)
from .pipeline import (
    HeadKind,
    TrainConfig,
    build_model,
    compare_heads,
    evaluate,
    load_checkpoint,
    save_checkpoint,
    train,
)

SCHEMA_VERSION = 1

_DATASET_DEFAULTS = {
    "synth": None,
    "data": None,
    "native_range": (1.0, 5.0),
    "n": 2000,
    "feature_dim": 8,
    "noise_std": 0.05,
    "data_seed": 0,
    "train_frac": 0.8,
}

_TRAIN_DEFAULTS = {
    **_DATASET_DEFAULTS,
    "head": "qscorer",
    "epochs": 30,
    "batch_size": 32,
    "optimizer": "adamw",
    "lr": 3e-3,
    "weight_decay": 0.0,
    "lambda_score": 1.0,
    "kl_weight": 0.0,
    "fidelity_weight": 0.0,
    "fidelity_variant": "token-dist",
    "nin_weight": 0.0,
    "rank_weight": 0.0,
    "rank_margin": 0.1,
    "teacher_forcing": True,
    "num_tokens": 5,
    "fusion": "add",
    "head_variant": "mlp",
    "sigma_fallback": None,
    "seed": 0,
    "figures": True,
}

_ANALYZE_DEFAULTS = {
    "method": "all",
    "samples": 1_000_000,
    "seed": 0,
    "mu": 3.0,
    "sigma": 0.5,
    "grid": 10_000,
    "sigma_sweep": (0.05, 0.1, 0.5, 1.0),
    "target": "sine-warped",
    "hidden_units": (4, 16, 64),
    "epochs": 8000,
    "figures": True,
}


def _json_dump(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def _jsonl_dump(records, path: Path) -> None:
    lines = [json.dumps(r, sort_keys=True) for r in records]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_manifest(out: Path, command: str, cfg: dict) -> None:
    _json_dump({"schema_version": SCHEMA_VERSION, "command": command, "config": cfg}, out / "manifest.json")


def _resolve(args: argparse.Namespace, defaults: dict) -> dict:
    """Merge built-in defaults, --config file values, and explicit flags."""
    cfg = dict(defaults)
    config_path = getattr(args, "config", None)
    if config_path:
        try:
            file_cfg = json.loads(Path(config_path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise DomainError(f"cannot read config file {config_path}: {exc}") from None
        if "config" in file_cfg and isinstance(file_cfg["config"], dict):
            file_cfg = file_cfg["config"]  # accept a previous run's manifest
        unknown = set(file_cfg) - set(cfg)
        if unknown:
            raise DomainError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(file_cfg)
    for key in cfg:
        v = getattr(args, key, None)
        if v is not None:
            cfg[key] = v
    # json round-trips tuples as lists; normalize for stable manifests
    for key, v in cfg.items():
        if isinstance(v, tuple):
            cfg[key] = list(v)
    return cfg


def _float_list(text: str):
    return tuple(float(v) for v in text.split(","))


def _int_list(text: str):
    return tuple(int(v) for v in text.split(","))


def _range_pair(text: str):
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("expected LO,HI")
    return (float(parts[0]), float(parts[1]))


def _add_dataset_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--synth", choices=GENERATORS, help="synthetic generator")
    p.add_argument("--data", help="CSV dataset path (id,mos[,std][,f0..fk])")
    p.add_argument("--native-range", dest="native_range", type=_range_pair,
                   help="native MOS range LO,HI of the CSV data")
    p.add_argument("--n", type=int, help="synthetic sample count")
    p.add_argument("--feature-dim", dest="feature_dim", type=int)
    p.add_argument("--noise-std", dest="noise_std", type=float)
    p.add_argument("--data-seed", dest="data_seed", type=int)
    p.add_argument("--train-frac", dest="train_frac", type=float)


def _load_dataset(cfg: dict):
    if cfg.get("data"):
        ds = load_csv(cfg["data"], tuple(cfg["native_range"]))
        return normalize_mos(ds)
    generator = cfg.get("synth") or "linear"
    spec = SynthSpec(
        n=cfg["n"],
        feature_dim=cfg["feature_dim"],
        generator=generator,
        noise_std=cfg["noise_std"],
        seed=cfg["data_seed"],
    )
    return generate_synthetic(spec)


def _train_config(cfg: dict) -> TrainConfig:
    return TrainConfig(
        epochs=cfg["epochs"],
        batch_size=cfg["batch_size"],
        optimizer=cfg["optimizer"],
        lr=cfg["lr"],
        weight_decay=cfg["weight_decay"],
        lambda_score=cfg["lambda_score"],
        kl_weight=cfg["kl_weight"],
        fidelity_weight=cfg["fidelity_weight"],
        fidelity_variant=cfg["fidelity_variant"],
        nin_weight=cfg["nin_weight"],
        rank_weight=cfg["rank_weight"],
        rank_margin=cfg["rank_margin"],
        teacher_forcing=cfg["teacher_forcing"],
        seed=cfg["seed"],
        sigma_fallback=cfg["sigma_fallback"],
    )


def _model_kwargs(cfg: dict) -> dict:
    kwargs = {
        "num_tokens": cfg["num_tokens"],
        "fusion": cfg["fusion"],
        "head_variant": cfg["head_variant"],
    }
    if cfg["fidelity_weight"] > 0.0 and cfg["fidelity_variant"] == "mlp-head":
        kwargs["fidelity_head"] = True
    return kwargs


def cmd_analyze_errors(args: argparse.Namespace) -> int:
    cfg = _resolve(args, _ANALYZE_DEFAULTS)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    method = cfg["method"]
    records = []

    if method in ("qalign", "all"):
        study = qalign_error_mc(cfg["samples"], cfg["seed"])
        records.append({
            "schema_version": SCHEMA_VERSION,
            "study": "qalign",
            "analytic": study.analytic,
            "mc_estimate": study.estimate,
            "samples": study.samples,
            "seed": study.seed,
        })

    if method in ("deqa", "all"):
        mu, sigma = cfg["mu"], cfg["sigma"]
        rating = GaussianRating(mu=mu, sigma=sigma)
        raw = deqa_raw_soft_label(rating)
        eps_raw, eps_enh = deqa_label_error(rating)
        lhs, bound = deqa_midpoint_bound(rating, grid=cfg["grid"])
        records.append({
            "schema_version": SCHEMA_VERSION,
            "study": "deqa_label",
            "mu": mu,
            "sigma": sigma,
            "mass_deficit": raw.diagnostics.mass_deficit,
            "eps2_raw": eps_raw,
            "eps2_enhanced": eps_enh,
        })
        records.append({
            "schema_version": SCHEMA_VERSION,
            "study": "deqa_bound",
            "mu": mu,
            "sigma": sigma,
            "lhs": lhs,
            "bound": bound,
            "holds": bool(lhs <= bound),
        })
        sweep = tuple(cfg["sigma_sweep"])
        rows = deqa_sigma_restoration_study(mu, sweep)
        deficits = []
        for s, s_res, err in rows:
            deficit = deqa_raw_soft_label(GaussianRating(mu=mu, sigma=s)).diagnostics.mass_deficit
            deficits.append(deficit)
            records.append({
                "schema_version": SCHEMA_VERSION,
                "study": "sigma_restoration",
                "mu": mu,
                "sigma": s,
                "sigma_res": s_res,
                "abs_error": err,
                "rel_error": err / s,
                "mass_deficit": deficit,
            })
        if cfg["figures"]:
            figures.save_sigma_restoration(rows, out / "sigma_restoration.png")
            figures.save_mass_deficit(sweep, deficits, out / "mass_deficit.png")

    if method in ("uat", "all"):
        units = tuple(cfg["hidden_units"])
        sups = []
        for h in units:
            sup, mse = uat_demo(cfg["target"], h, epochs=cfg["epochs"], seed=cfg["seed"])
            sups.append(sup)
            records.append({
                "schema_version": SCHEMA_VERSION,
                "study": "uat",
                "target": cfg["target"],
                "hidden_units": h,
                "epochs": cfg["epochs"],
                "seed": cfg["seed"],
                "sup_error": sup,
                "mse": mse,
            })
        if cfg["figures"]:
            figures.save_uat_capacity(units, sups, out / "uat_capacity.png")

    _jsonl_dump(records, out / "errors.jsonl")
    _write_manifest(out, "analyze-errors", cfg)
    print(f"wrote {len(records)} study records to {out / 'errors.jsonl'}")
    return 0


def cmd_softlabel(args: argparse.Namespace) -> int:
    mu, sigma = args.mu, args.sigma
    if not 1.0 <= mu <= 5.0:
        print(f"error: --mu must be in [1, 5], got {mu}", file=sys.stderr)
        return 2
    if not sigma > 0.0:
        print(f"error: --sigma must be > 0, got {sigma}", file=sys.stderr)
        return 2
    raw = deqa_raw_soft_label(GaussianRating(mu=mu, sigma=sigma))
    enhanced = deqa_enhance(raw, mu)
    mu_res, sigma_res = label_moments(enhanced.probs)
    mass_residual = abs(float(np.sum(enhanced.probs)) - 1.0)
    mean_residual = abs(enhanced.mean() - mu)

    print(f"rating: mu={mu} sigma={sigma}")
    print("raw label:      " + " ".join(f"{p:.6f}" for p in raw.probs))
    print(f"mass deficit:   {raw.diagnostics.mass_deficit:.6e}")
    print("enhanced label: " + " ".join(f"{p:.6f}" for p in enhanced.probs))
    print(f"sum residual:   {mass_residual:.3e}")
    print(f"mean residual:  {mean_residual:.3e}")
    print(f"negativity:     {enhanced.diagnostics.negative_probs}")
    print(f"restored:       mu={mu_res:.6f} sigma={sigma_res:.6f}")

    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        report = {
            "schema_version": SCHEMA_VERSION,
            "mu": mu,
            "sigma": sigma,
            "raw_probs": [float(p) for p in raw.probs],
            "mass_deficit": raw.diagnostics.mass_deficit,
            "enhanced_probs": [float(p) for p in enhanced.probs],
            "sum_residual": mass_residual,
            "mean_residual": mean_residual,
            "negative_probs": enhanced.diagnostics.negative_probs,
            "mu_restored": mu_res,
            "sigma_restored": sigma_res,
        }
        _json_dump(report, out / "softlabel.json")
        _write_manifest(out, "softlabel", {"mu": mu, "sigma": sigma})
    return 0


def _write_trace_csv(trace: list[dict], path: Path) -> None:
    keys = ["epoch"] + sorted(k for k in trace[0] if k != "epoch")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(keys)
        for row in trace:
            writer.writerow([repr(row.get(k, "")) if k != "epoch" else row["epoch"] for k in keys])


def cmd_train(args: argparse.Namespace) -> int:
    cfg = _resolve(args, _TRAIN_DEFAULTS)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    dataset = _load_dataset(cfg)
    train_set, test_set = split(dataset, cfg["train_frac"], cfg["seed"])
    tcfg = _train_config(cfg)
    model = build_model(
        train_set.samples[0].features.shape[0],
        head=HeadKind(cfg["head"]),
        seed=cfg["seed"],
        **_model_kwargs(cfg),
    )
    trace = train(model, train_set, tcfg)
    report = evaluate(model, test_set)
    report.loss_trace = trace

    save_checkpoint(model, out / "checkpoint.json")
    payload = report.to_dict()
    payload["config"] = cfg
    _json_dump(payload, out / "report.json")
    _write_trace_csv(trace, out / "loss_trace.csv")
    if cfg["figures"]:
        figures.save_loss_curve(trace, out / "loss_curve.png")
        figures.save_pred_scatter(
            report.targets, report.predictions, out / "pred_scatter.png",
            title=f"{cfg['head']}  plcc={report.plcc:.4f}" if report.plcc is not None else cfg["head"],
        )
    _write_manifest(out, "train", cfg)
    plcc_txt = "n/a" if report.plcc is None else f"{report.plcc:.4f}"
    srcc_txt = "n/a" if report.srcc is None else f"{report.srcc:.4f}"
    print(f"held-out plcc={plcc_txt} srcc={srcc_txt} -> {out / 'report.json'}")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    cfg = _resolve(args, {**_DATASET_DEFAULTS, "part": "test", "seed": 0, "figures": True})
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    model = load_checkpoint(args.checkpoint)
    dataset = _load_dataset(cfg)
    if cfg["part"] != "all":
        train_set, test_set = split(dataset, cfg["train_frac"], cfg["seed"])
        dataset = train_set if cfg["part"] == "train" else test_set
    report = evaluate(model, dataset)
    payload = report.to_dict()
    payload["config"] = cfg
    _json_dump(payload, out / "report.json")
    if cfg["figures"]:
        figures.save_pred_scatter(report.targets, report.predictions, out / "pred_scatter.png")
    _write_manifest(out, "eval", cfg)
    plcc_txt = "n/a" if report.plcc is None else f"{report.plcc:.4f}"
    srcc_txt = "n/a" if report.srcc is None else f"{report.srcc:.4f}"
    print(f"plcc={plcc_txt} srcc={srcc_txt} -> {out / 'report.json'}")
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    cfg = _resolve(args, {**_TRAIN_DEFAULTS, "heads": "qscorer,qalign,deqa,linear"})
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    heads = [HeadKind(h.strip()) for h in cfg["heads"].split(",") if h.strip()]
    dataset = _load_dataset(cfg)
    train_set, test_set = split(dataset, cfg["train_frac"], cfg["seed"])
    rows = compare_heads(
        train_set, test_set, _train_config(cfg), heads=heads,
        model_kwargs=_model_kwargs(cfg),
    )

    with open(out / "compare.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["head", "plcc", "srcc", "token_accuracy", "epochs_to_plcc"])
        for r in rows:
            writer.writerow([
                r["head"],
                "" if r["plcc"] is None else repr(r["plcc"]),
                "" if r["srcc"] is None else repr(r["srcc"]),
                repr(r["token_accuracy"]),
                "" if r["epochs_to_plcc"] is None else r["epochs_to_plcc"],
            ])
    _json_dump({"schema_version": SCHEMA_VERSION, "rows": rows, "config": cfg}, out / "compare.json")
    if cfg["figures"]:
        figures.save_head_comparison(rows, out / "head_comparison.png")
    _write_manifest(out, "compare", cfg)
    for r in rows:
        plcc_txt = "n/a" if r["plcc"] is None else f"{r['plcc']:.4f}"
        srcc_txt = "n/a" if r["srcc"] is None else f"{r['srcc']:.4f}"
        print(f"{r['head']:>8}: plcc={plcc_txt} srcc={srcc_txt}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scorelab",
        description="Quality-score conversion lab: error studies, soft labels, training, evaluation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    pa = sub.add_parser("analyze-errors", help="run conversion-error studies")
    pa.add_argument("--method", choices=["qalign", "deqa", "uat", "all"])
    pa.add_argument("--samples", type=int)
    pa.add_argument("--seed", type=int)
    pa.add_argument("--mu", type=float)
    pa.add_argument("--sigma", type=float)
    pa.add_argument("--grid", type=int)
    pa.add_argument("--sigma-sweep", dest="sigma_sweep", type=_float_list)
    pa.add_argument("--target", choices=sorted(UAT_TARGETS))
    pa.add_argument("--hidden-units", dest="hidden_units", type=_int_list)
    pa.add_argument("--epochs", type=int)
    pa.add_argument("--figures", action=argparse.BooleanOptionalAction)
    pa.add_argument("--config", help="JSON config file (flags win)")
    pa.add_argument("--out", default="runs/analyze-errors")
    pa.set_defaults(func=cmd_analyze_errors)

    ps = sub.add_parser("softlabel", help="inspect raw/enhanced soft labels for one rating")
    ps.add_argument("--mu", type=float, required=True)
    ps.add_argument("--sigma", type=float, required=True)
    ps.add_argument("--out", default=None)
    ps.set_defaults(func=cmd_softlabel)

    def add_train_flags(p):
        _add_dataset_flags(p)
        p.add_argument("--head", choices=[h.value for h in HeadKind])
        p.add_argument("--epochs", type=int)
        p.add_argument("--batch-size", dest="batch_size", type=int)
        p.add_argument("--optimizer", choices=["sgd", "adamw"])
        p.add_argument("--lr", type=float)
        p.add_argument("--weight-decay", dest="weight_decay", type=float)
        p.add_argument("--lambda-score", dest="lambda_score", type=float)
        p.add_argument("--kl-weight", dest="kl_weight", type=float)
        p.add_argument("--fidelity-weight", dest="fidelity_weight", type=float)
        p.add_argument("--fidelity-variant", dest="fidelity_variant", choices=["token-dist", "mlp-head"])
        p.add_argument("--nin-weight", dest="nin_weight", type=float)
        p.add_argument("--rank-weight", dest="rank_weight", type=float)
        p.add_argument("--rank-margin", dest="rank_margin", type=float)
        p.add_argument("--teacher-forcing", dest="teacher_forcing", action=argparse.BooleanOptionalAction)
        p.add_argument("--num-tokens", dest="num_tokens", type=int, choices=[1, 5])
        p.add_argument("--fusion", choices=["add", "concat"])
        p.add_argument("--head-variant", dest="head_variant", choices=["mlp", "hyper"])
        p.add_argument("--sigma-fallback", dest="sigma_fallback", type=float)
        p.add_argument("--seed", type=int)
        p.add_argument("--figures", action=argparse.BooleanOptionalAction)
        p.add_argument("--config", help="JSON config file (flags win)")

    pt = sub.add_parser("train", help="train a scoring head on a dataset")
    add_train_flags(pt)
    pt.add_argument("--out", default="runs/train")
    pt.set_defaults(func=cmd_train)

    pe = sub.add_parser("eval", help="evaluate a checkpoint on a dataset")
    _add_dataset_flags(pe)
    pe.add_argument("--checkpoint", required=True)
    pe.add_argument("--part", choices=["train", "test", "all"])
    pe.add_argument("--seed", type=int)
    pe.add_argument("--figures", action=argparse.BooleanOptionalAction)
    pe.add_argument("--config", help="JSON config file (flags win)")
    pe.add_argument("--out", default="runs/eval")
    pe.set_defaults(func=cmd_eval)

    pc = sub.add_parser("compare", help="train and compare scoring heads")
    add_train_flags(pc)
    pc.add_argument("--heads")
    pc.add_argument("--out", default="runs/compare")
    pc.set_defaults(func=cmd_compare)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed usage
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ParseError, TrainingError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:  # domain/validation problems are usage errors
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
