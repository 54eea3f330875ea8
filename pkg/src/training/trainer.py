"""
Training loop and evaluation protocol for the Asplund distance layer
"""

import logging
from dataclasses import asdict, dataclass, field

import numpy as np
import pandas as pd

from src.dataset.ground_truth import build_ground_truth, lip_shift_set
from src.dataset.reference_probes import make_reference_probe
from src.errors import TrainingDivergedError
from src.layer.asplund_layer import FULL_SUPPORT_LOGIT, AsplundLayer, KernelPair
from src.training.losses import get_loss
from src.training.optimizers import make_optimizer
from src.training.probe_error import probe_error

logger = logging.getLogger(__name__)

CLIP_MARGIN = 1.0


@dataclass
class TrainConfig:
    """
    Hyperparameters of a training run.

    Defaults follow the reference protocol (15 epochs, Adam, α = 0.5, batch size 20)
    with two changes: the loss is LIPMSE and layers start from a fully open mask
    (logit ``mask_init``) instead of null kernels. ``mask_init=None`` restores the
    null start.
    """

    epochs: int = 15
    learning_rate: float = 0.5
    batch_size: int = 20
    optimizer: str = "adam"
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    loss: str = "LIPMSE"
    mask_init: float = FULL_SUPPORT_LOGIT
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be at least 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be at least 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.mask_init is not None and not np.isfinite(self.mask_init):
            raise ValueError("mask_init must be finite")
        get_loss(self.loss)
        self.loss = self.loss.upper()
        self.optimizer = self.optimizer.lower()

    def as_dict(self):
        return asdict(self)

    def initial_kernels(self, shape=(7, 7)):
        """Starting kernels: zero heights, mask logits at ``mask_init`` (or 0)."""
        if self.mask_init is None:
            return KernelPair.zeros(shape)
        return KernelPair.full_support(shape, self.mask_init)


@dataclass
class TrainRun:
    """Outcome of ``train``: the batch log and the optimiser that produced it."""

    config: TrainConfig
    records: list = field(default_factory=list)
    optimizer: object = None

    def batch_log(self):
        """DataFrame with columns epoch, batch, loss, ties."""
        return pd.DataFrame(self.records, columns=["epoch", "batch", "loss", "ties"])

    def epoch_summary(self):
        """Mean loss and total tie count per epoch."""
        log = self.batch_log()
        return log.groupby("epoch").agg(loss=("loss", "mean"), ties=("ties", "sum")).reset_index()

    @property
    def losses(self):
        return [record[2] for record in self.records]


def _clip_heights(layer):
    limit = layer.M - CLIP_MARGIN
    over = layer.kernels.W_h > limit
    if over.any():
        logger.debug("clipping %d height(s) to M - %g", int(over.sum()), CLIP_MARGIN)
        layer.kernels.W_h[over] = limit


def train(layer, images, targets, config=None):
    """
    Fit the layer's kernels so that layer(images) approaches targets.

    Args:
        layer (AsplundLayer): Layer to train (updated in place)
        images (np.ndarray): N×H×W inputs f
        targets (np.ndarray): N×H×W ground truths g
        config (TrainConfig, optional): Hyperparameters. Defaults to TrainConfig().

    Returns:
        TrainRun: Per-batch loss log

    Raises:
        TrainingDivergedError: If a batch loss is NaN
    """
    config = config or TrainConfig()
    images = np.asarray(images, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if images.shape != targets.shape:
        raise ValueError(f"images {images.shape} and targets {targets.shape} differ in shape")

    loss_fn, grad_fn = get_loss(config.loss, layer.M)
    optimizer = make_optimizer(config.optimizer, config.learning_rate, config.beta1, config.beta2, config.epsilon)
    rng = np.random.default_rng(config.seed)
    run = TrainRun(config, optimizer=optimizer)
    params = layer.kernels.as_dict()

    for epoch in range(config.epochs):
        order = rng.permutation(len(images))
        for batch, start in enumerate(range(0, len(order), config.batch_size)):
            index = order[start:start + config.batch_size]
            f, g = images[index], targets[index]

            g_hat = layer.forward(f)
            # loss over the whole batch = mean of per-image losses (same sizes)
            loss = loss_fn(g, g_hat)
            if np.isnan(loss):
                raise TrainingDivergedError(config.learning_rate, epoch, batch)
            grads = layer.backward(grad_fn(g, g_hat))
            optimizer.step(params, grads.as_dict())
            _clip_heights(layer)

            run.records.append((epoch, batch, loss, layer.last_tie_count))
            logger.debug("epoch %d batch %d loss %.6e", epoch, batch, loss)

        epoch_losses = [r[2] for r in run.records if r[0] == epoch]
        ties = sum(r[3] for r in run.records if r[0] == epoch)
        logger.info("epoch %d/%d mean loss %.6e ties %d", epoch + 1, config.epochs, float(np.mean(epoch_losses)), ties)
    return run


@dataclass
class EvalReport:
    """
    Validation metrics per test set.

    ``table`` has one row per (test set, metric) with columns test_set, metric,
    average, std_dev and abs_avg_diff (difference of the average with the first
    test set). ``probe`` holds E_pr / mask MSE rows when a reference was given.
    """

    table: pd.DataFrame
    probe: pd.DataFrame = None

    def max_abs_diff(self, metric=None):
        rows = self.table if metric is None else self.table[self.table["metric"] == metric]
        return float(rows["abs_avg_diff"].max())


def evaluate(predict, test_sets, ground_truth, metrics=("MSE", "LIPMSE"), M=256.0, reference=None, kernels=None):
    """
    Average validation metrics of a predictor over several test sets.

    Every test set is compared with the same ground truth, computed on the
    original images.

    Args:
        predict (callable): Maps an N×H×W stack to N×H×W predictions
            (e.g. ``layer.predict``)
        test_sets (dict): Name → N×H×W images; the first entry is the baseline
        ground_truth (np.ndarray): N×H×W target maps
        metrics (tuple): Metric names understood by ``get_loss``
        M (float): Ceiling
        reference (ReferenceProbe, optional): Adds E_pr and mask MSE of ``kernels``
        kernels (KernelPair, optional): Learned kernels compared with ``reference``

    Returns:
        EvalReport: Metrics table (and probe table if requested)
    """
    ground_truth = np.asarray(ground_truth, dtype=np.float64)
    rows = []
    baseline = {}
    for name, images in test_sets.items():
        predictions = np.asarray(predict(images), dtype=np.float64)
        for metric in metrics:
            loss_fn, _ = get_loss(metric, M)
            per_image = np.array([loss_fn(g, p) for g, p in zip(ground_truth, predictions)])
            average = float(per_image.mean())
            baseline.setdefault(metric, average)
            rows.append(
                {
                    "test_set": name,
                    "metric": metric,
                    "average": average,
                    "std_dev": float(per_image.std()),
                    "abs_avg_diff": abs(average - baseline[metric]),
                }
            )
        logger.info("evaluated test set %r on %d images", name, len(predictions))

    probe_table = None
    if reference is not None and kernels is not None:
        result = probe_error(kernels.W_h, kernels.W_m, reference.W_h, reference.mask, M=M)
        probe_table = pd.DataFrame(
            [
                {"kernel": "W_h", "error": "E_pr", "value": result.e_pr},
                {"kernel": "W_m", "error": "MSE", "value": result.mask_mse},
            ]
        )
    return EvalReport(pd.DataFrame(rows), probe_table)


def lighting_test_sets(images, shift=100.0, M=256.0):
    """The three test sets of the invariance protocol: original, darkened (f ⊕ k), brightened (f ⊖ k)."""
    return {
        "original": np.asarray(images, dtype=np.float64),
        "darkened": lip_shift_set(images, shift, M=M),
        "brightened": lip_shift_set(images, -shift, M=M),
    }


def replicate_probe_recovery(images, pairs, config=None, M=256.0, kernel_shape=(7, 7), cache_dir=None):
    """
    Train one layer per reference probe and measure how well it is recovered.

    Args:
        images (np.ndarray): N×H×W training images
        pairs (list): (β, c) pairs of the reference probes
        config (TrainConfig, optional): Hyperparameters shared by every run
        M (float): Ceiling
        kernel_shape (tuple): Size of the learned kernels
        cache_dir (str, optional): Ground-truth cache directory

    Returns:
        pd.DataFrame: One row per probe with beta, c, e_pr, mask_mse, final_loss, ties
    """
    config = config or TrainConfig()
    rows = []
    for beta, c in pairs:
        reference = make_reference_probe(beta, c, M=M)
        targets = build_ground_truth(images, reference, cache_dir=cache_dir)
        layer = AsplundLayer(M=M, kernels=config.initial_kernels(kernel_shape), track_ties=True)
        run = train(layer, images, targets, config)
        result = probe_error(layer.kernels.W_h, layer.kernels.W_m, reference.W_h, reference.mask, M=M)
        rows.append(
            {
                "beta": beta,
                "c": c,
                "e_pr": result.e_pr,
                "mask_mse": result.mask_mse,
                "final_loss": run.losses[-1],
                "ties": int(run.batch_log()["ties"].sum()),
            }
        )
        logger.info("probe beta=%g c=%g: E_pr %.3e, mask MSE %.3e", beta, c, result.e_pr, result.mask_mse)
    return pd.DataFrame(rows, columns=["beta", "c", "e_pr", "mask_mse", "final_loss", "ties"])
