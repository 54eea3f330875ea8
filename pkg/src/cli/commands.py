"""
Subcommands of the command line: probe generation, ground truths, training,
evaluation, prediction dumps, probe errors and the probe-recovery replication.

Every subcommand accepts ``--config FILE`` (see ``src.cli.config``); explicit
flags override the file, which overrides the defaults below.
"""

import argparse
import logging
import os

import numpy as np
import pandas as pd

from src.asplund.distance import asplund_map_morphological, classical_asplund_map
from src.cli.config import apply_config, read_config
from src.cli.manifest import RunManifest
from src.dataset.data_processor import generate_sample_data, load_data
from src.dataset.ground_truth import build_ground_truth, read_ground_truth, write_ground_truth
from src.dataset.idx import dataset_hash, read_idx
from src.dataset.reference_probes import BETA_GRID, C_GRID, generate_probe_files, load_reference_probe, probe_grid
from src.errors import (
    ConfigError,
    DataFormatError,
    LipConfigurationError,
    LipDomainError,
    NumericError,
    ProbeError,
)
from src.layer.asplund_layer import FULL_SUPPORT_LOGIT, AsplundLayer
from src.layer.checkpoint import load_checkpoint, save_checkpoint
from src.lip.arithmetic import DEFAULT_M
from src.training.losses import LOSSES
from src.training.probe_error import probe_error
from src.training.trainer import TrainConfig, evaluate, lighting_test_sets, replicate_probe_recovery, train
from src.visualization.charts import (
    create_kernel_heatmaps,
    create_loss_chart,
    create_probe_recovery_chart,
    save_figure,
)
from src.visualization.pgm import dump_image, read_pgm

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")
PREDICT_PANELS = (
    "input",
    "darkened",
    "brightened",
    "ground_truth",
    "prediction_original",
    "prediction_darkened",
    "prediction_brightened",
)


def _float_list(text):
    try:
        values = [float(value) for value in str(text).split(",") if value.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc
    if not values:
        raise argparse.ArgumentTypeError("expected at least one number")
    return values


def _stem(path):
    return os.path.splitext(path)[0]


def _add_data_flags(parser, limit=None):
    parser.add_argument("--data", default=None, help="Dataset directory or IDX images file (default $LMM_DATA_DIR or data/raw)")
    parser.add_argument("--split", default="train", choices=["train", "test"], help="Dataset split")
    parser.add_argument("--limit", type=int, default=limit, help="Use only the first N images")
    parser.add_argument("--synthetic", type=int, default=None, metavar="N", help="Use N synthetic images instead of files")
    parser.add_argument("--data-seed", type=int, default=0, help="Seed of the synthetic images")


def _add_train_flags(parser):
    parser.add_argument("--epochs", type=int, default=15)
    parser.add_argument("--lr", type=float, default=0.5, help="Learning rate α")
    parser.add_argument("--batch", type=int, default=20, help="Batch size")
    parser.add_argument("--loss", default="LIPMSE", choices=sorted(LOSSES))
    parser.add_argument("--optimizer", default="adam", choices=["adam", "sgd"])
    parser.add_argument("--seed", type=int, default=0, help="Seed of the batch order")
    parser.add_argument("--kernel-size", type=int, default=7, help="Side of the learned kernels")
    parser.add_argument(
        "--mask-init", type=float, default=FULL_SUPPORT_LOGIT, help="Starting mask logit of every tap"
    )
    parser.add_argument("--null-init", action="store_true", help="Start from null kernels (mask logits 0)")


def _train_config(args):
    return TrainConfig(
        epochs=args.epochs,
        learning_rate=args.lr,
        batch_size=args.batch,
        optimizer=args.optimizer,
        loss=args.loss,
        mask_init=None if args.null_init else args.mask_init,
        seed=args.seed,
    )


def _write_csv(table, path):
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    table.to_csv(path, index=False)


def _settings(args):
    return {key: value for key, value in sorted(vars(args).items()) if key not in ("func", "config")}


def _load_images(args):
    if args.synthetic:
        images = generate_sample_data(args.synthetic, seed=args.data_seed)
        logger.info("generated %d synthetic images (seed %d)", len(images), args.data_seed)
        return images
    return load_data(args.data, args.split, args.limit)


def _load_ground_truth(path, images):
    maps, header = read_ground_truth(path)
    if maps.shape != images.shape or header.get("dataset") != dataset_hash(images):
        raise DataFormatError(
            f"{path}: ground truth was built for other images "
            f"({header.get('dataset')}, {maps.shape}) than the ones given ({dataset_hash(images)}, {images.shape})"
        )
    return maps, header


def _read_single_image(path, index):
    if path.lower().endswith(".pgm"):
        return read_pgm(path).astype(np.float64)
    stack = read_idx(path)
    if stack.ndim == 2:
        return stack.astype(np.float64)
    if stack.ndim != 3 or not 0 <= index < len(stack):
        raise DataFormatError(f"{path}: no image at index {index} (shape {stack.shape})")
    return stack[index].astype(np.float64)


def cmd_gen_probes(args):
    """Write one reference probe file (and a height preview) per (β, c) pair."""
    pairs = probe_grid(args.beta_list, args.c_list)
    paths = generate_probe_files(args.out, pairs, M=args.M)
    if args.preview:
        for path in paths:
            reference = load_reference_probe(path)
            dump_image(os.path.join(args.out, "preview", reference.name), reference.W_h, M=reference.M)
    RunManifest("gen-probes", _settings(args)).finish().write(os.path.join(args.out, "manifest.txt"))
    print(f"wrote {len(paths)} probe files to {args.out}")


def cmd_ground_truth(args):
    """Compute ground-truth distance maps of a dataset for one reference probe."""
    images = _load_images(args)
    reference = load_reference_probe(args.probe)
    maps = build_ground_truth(images, reference, cache_dir=args.cache_dir)
    images_hash = dataset_hash(images)
    write_ground_truth(args.out, maps, reference.beta, reference.c, reference.M, images_hash)
    RunManifest(
        "ground-truth",
        _settings(args),
        seed=args.data_seed,
        datasets={"images": images_hash},
        probe={"beta": reference.beta, "c": reference.c},
    ).finish().write(f"{args.out}.manifest")
    print(f"wrote {len(maps)} ground-truth maps to {args.out}")


def cmd_train(args):
    """Train a layer on (image, ground truth) pairs and write checkpoint, log, figure and manifest."""
    images = _load_images(args)
    targets, header = _load_ground_truth(args.gt, images)
    config = _train_config(args)
    layer = AsplundLayer(M=header["M"], kernels=config.initial_kernels((args.kernel_size, args.kernel_size)), track_ties=True)
    run = train(layer, images, targets, config)

    stem = _stem(args.checkpoint_out)
    save_checkpoint(args.checkpoint_out, layer, beta=header["beta"], c=header["c"], epochs=config.epochs)
    log_path = args.log_out or f"{stem}.log.csv"
    _write_csv(run.batch_log(), log_path)
    save_figure(create_loss_chart(run.batch_log(), config.loss), args.figure_out or f"{stem}.loss.html")
    RunManifest(
        "train",
        _settings(args),
        seed=config.seed,
        datasets={"images": header["dataset"]},
        probe={"beta": header["beta"], "c": header["c"]},
    ).finish().write(f"{stem}.manifest")
    print(f"final batch loss {run.losses[-1]:.6e}; checkpoint {args.checkpoint_out}")


def cmd_eval(args):
    """Evaluate a checkpoint (or the classical control map) on original, darkened and brightened test sets."""
    images = _load_images(args)
    targets, header = _load_ground_truth(args.gt, images)
    M = header["M"]
    reference = load_reference_probe(args.reference) if args.reference else None

    if args.control:
        if reference is None:
            raise ConfigError("--control needs --reference")
        probe = reference.probe()

        def predict(images):
            return classical_asplund_map(images, probe)

        kernels = None
    else:
        if not args.checkpoint:
            raise ConfigError("eval needs --checkpoint (or --control with --reference)")
        layer = load_checkpoint(args.checkpoint)
        predict = layer.predict
        kernels = layer.kernels

    report = evaluate(predict, lighting_test_sets(images, args.shift, M), targets, M=M, reference=reference, kernels=kernels)
    _write_csv(report.table, args.report_out)
    if report.probe is not None:
        _write_csv(report.probe, f"{_stem(args.report_out)}.probe.csv")
    RunManifest("eval", _settings(args), datasets={"images": header["dataset"]}).finish().write(
        f"{_stem(args.report_out)}.manifest"
    )
    print(f"largest absolute average difference {report.max_abs_diff():.3e}")


def cmd_predict(args):
    """Dump an image, its lighting variants, the ground truth and the three predictions."""
    image = _read_single_image(args.image, args.index)
    layer = load_checkpoint(args.checkpoint)
    M = layer.M
    variants = lighting_test_sets(image[None], args.shift, M)
    panels = {
        "input": variants["original"][0],
        "darkened": variants["darkened"][0],
        "brightened": variants["brightened"][0],
    }
    if args.reference:
        reference = load_reference_probe(args.reference)
        panels["ground_truth"] = asplund_map_morphological(image, reference.probe(), M=M)
    else:
        logger.warning("no --reference given; the ground-truth panel is skipped")
    for name in ("original", "darkened", "brightened"):
        panels[f"prediction_{name}"] = layer.predict(variants[name])[0]

    os.makedirs(args.out, exist_ok=True)
    for name in PREDICT_PANELS:
        if name in panels:
            dump_image(os.path.join(args.out, name), panels[name], M=M)
    RunManifest("predict", _settings(args)).finish().write(os.path.join(args.out, "manifest.txt"))
    print(f"wrote {len(panels)} panels to {args.out}")


def cmd_probe_error(args):
    """Compare a checkpoint with a reference probe."""
    layer = load_checkpoint(args.checkpoint)
    reference = load_reference_probe(args.reference)
    result = probe_error(layer.kernels.W_h, layer.kernels.W_m, reference.W_h, reference.mask, M=reference.M)
    table = pd.DataFrame(
        [{"beta": reference.beta, "c": reference.c, "e_pr": result.e_pr, "mask_mse": result.mask_mse, "shift": result.shift}]
    )
    _write_csv(table, args.out)
    if args.figure_out:
        save_figure(
            create_kernel_heatmaps(layer.kernels.W_h, layer.kernels.W_m, reference.W_h, reference.mask), args.figure_out
        )
    RunManifest("probe-error", _settings(args), probe={"beta": reference.beta, "c": reference.c}).finish().write(
        f"{_stem(args.out)}.manifest"
    )
    print(f"E_pr {result.e_pr:.6e}, mask MSE {result.mask_mse:.6e}")


def cmd_replicate(args):
    """Train one layer per reference probe and tabulate the recovery errors."""
    images = _load_images(args)
    pairs = probe_grid(args.beta_list, args.c_list)
    table = replicate_probe_recovery(
        images,
        pairs,
        _train_config(args),
        M=DEFAULT_M,
        kernel_shape=(args.kernel_size, args.kernel_size),
        cache_dir=args.cache_dir,
    )
    _write_csv(table, args.out)
    if args.figure_out:
        save_figure(create_probe_recovery_chart(table), args.figure_out)
    RunManifest(
        "replicate", _settings(args), seed=args.seed, datasets={"images": dataset_hash(images)}
    ).finish().write(f"{_stem(args.out)}.manifest")
    summary = table[["e_pr", "mask_mse"]].mean()
    print(f"{len(table)} probes: mean E_pr {summary['e_pr']:.3e}, mean mask MSE {summary['mask_mse']:.3e}")


def build_parser():
    """
    Build the argument parser.

    Returns:
        tuple: (top-level parser, dict of subcommand name → subparser)
    """
    parser = argparse.ArgumentParser(prog="lmm", description="Logarithmic morphology and Asplund distance layers")
    parser.add_argument("--log-level", type=str.upper, choices=LOG_LEVELS, default=None, help="Default $LMM_LOG_LEVEL or INFO")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="Flat key = value file of flag defaults")
    subparsers = parser.add_subparsers(dest="command", required=True)
    commands = {}

    def add(name, func, help_text):
        sub = subparsers.add_parser(name, parents=[common], help=help_text, description=help_text)
        sub.set_defaults(func=func)
        commands[name] = sub
        return sub

    sub = add("gen-probes", cmd_gen_probes, "Generate reference probe files")
    sub.add_argument("--beta-list", type=_float_list, default=list(BETA_GRID))
    sub.add_argument("--c-list", type=_float_list, default=list(C_GRID))
    sub.add_argument("--out", required=True, help="Output directory")
    sub.add_argument("--M", type=float, default=DEFAULT_M)
    sub.add_argument("--no-preview", dest="preview", action="store_false", help="Skip the PGM height previews")

    sub = add("ground-truth", cmd_ground_truth, "Compute ground-truth distance maps")
    _add_data_flags(sub)
    sub.add_argument("--probe", required=True, help="Reference probe file")
    sub.add_argument("--out", required=True, help="Ground-truth file")
    sub.add_argument("--cache-dir", default=None)

    sub = add("train", cmd_train, "Train an Asplund distance layer")
    _add_data_flags(sub)
    _add_train_flags(sub)
    sub.add_argument("--gt", required=True, help="Ground-truth file of the same images")
    sub.add_argument("--checkpoint-out", required=True)
    sub.add_argument("--log-out", default=None, help="Batch log CSV (default <checkpoint>.log.csv)")
    sub.add_argument("--figure-out", default=None, help="Loss chart HTML (default <checkpoint>.loss.html)")

    sub = add("eval", cmd_eval, "Evaluate lighting invariance")
    _add_data_flags(sub)
    sub.add_argument("--gt", required=True)
    sub.add_argument("--checkpoint", default=None)
    sub.add_argument("--reference", default=None, help="Reference probe; adds probe errors")
    sub.add_argument("--control", action="store_true", help="Evaluate the classical (non-LIP) map of the reference probe")
    sub.add_argument("--shift", type=float, default=100.0, help="LIP constant of the darkened/brightened sets")
    sub.add_argument("--report-out", required=True)

    sub = add("predict", cmd_predict, "Dump the seven prediction panels of one image")
    sub.add_argument("--image", required=True, help="PGM file or IDX images file")
    sub.add_argument("--index", type=int, default=0, help="Image index within an IDX file")
    sub.add_argument("--checkpoint", required=True)
    sub.add_argument("--reference", default=None)
    sub.add_argument("--shift", type=float, default=100.0)
    sub.add_argument("--out", required=True, help="Output directory")

    sub = add("probe-error", cmd_probe_error, "Compare learned kernels with a reference probe")
    sub.add_argument("--checkpoint", required=True)
    sub.add_argument("--reference", required=True)
    sub.add_argument("--out", required=True, help="CSV report")
    sub.add_argument("--figure-out", default=None, help="Kernel heatmap HTML")

    sub = add("replicate", cmd_replicate, "Desk-scale probe-recovery experiment")
    _add_data_flags(sub, limit=1000)
    _add_train_flags(sub)
    sub.add_argument("--beta-list", type=_float_list, default=[0.4, 1.0])
    sub.add_argument("--c-list", type=_float_list, default=[50.0, 150.0])
    sub.add_argument("--cache-dir", default=None)
    sub.add_argument("--out", required=True, help="CSV table")
    sub.add_argument("--figure-out", default=None)
    return parser, commands


def parse_args(argv=None):
    """
    Parse the command line, applying ``--config`` between flags and defaults.

    Raises:
        ConfigError: For unknown or malformed configuration entries
        SystemExit: On argparse usage errors (status 2)
    """
    parser, commands = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        apply_config(commands[args.command], read_config(args.config))
        args = parser.parse_args(argv)
    return args


def run(args):
    """
    Execute a parsed command.

    Returns:
        int: Exit status (0 success, 2 usage, 3 data, 4 numeric)
    """
    logger.info("starting %s", args.command)
    try:
        args.func(args)
    except (ConfigError, ValueError) as exc:
        logger.error("%s", exc)
        return EXIT_USAGE
    except NumericError as exc:
        logger.error("numeric failure: %s", exc)
        return EXIT_NUMERIC
    except (DataFormatError, FileNotFoundError, ProbeError, LipDomainError, LipConfigurationError) as exc:
        logger.error("data error: %s", exc)
        return EXIT_DATA
    except OSError as exc:
        logger.error("cannot read or write %s: %s", exc.filename, exc.strerror or exc)
        return EXIT_DATA
    logger.info("finished %s", args.command)
    return EXIT_OK
