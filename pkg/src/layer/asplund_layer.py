"""
Trainable map-of-Asplund-distances layer.

The probe is parameterised by a height kernel W_h (grey levels) and a mask
kernel W_m (logits). With V = χ(W_m) and ⊥ = −ξ(M − 1):

    b̃_dil = −ξ(W̄_h)·V̄ + ⊥·(1 − V̄)        (reflected)
    b̃_ero =  ξ(W_h)·V + ⊥·(1 − V)
    ĝ     = ξ⁻¹[δ_{b̃_dil}(ξ(f)) − ε_{b̃_ero}(ξ(f))]

The forward pass records, per output pixel, which tap won the dilation and the
erosion; the backward pass routes gradients through those taps only. Taps whose
logit is at or below −HARD_MASK_LOGIT are outside the support and never win.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from src.errors import LayerStateError, LipDomainError
from src.lip.arithmetic import DEFAULT_M, LipImage, bottom_value, resolve_m, xi, xi_derivative, xi_inv
from src.morphology.operators import count_near_ties, dilate_with_argmax, erode_with_argmin
from src.morphology.probe import Probe

logger = logging.getLogger(__name__)

HARD_MASK_LOGIT = 30.0
# χ(15) = 1 − 3.1e-7: the soft-mask pull towards ⊥ stays below 1e-3 in ξ
FULL_SUPPORT_LOGIT = 15.0


@dataclass
class KernelPair:
    """
    Learnable parameters of the probe.

    Args:
        W_h (np.ndarray): A×B heights, grey-level units, below M
        W_m (np.ndarray): A×B mask logits
    """

    W_h: np.ndarray
    W_m: np.ndarray

    def __post_init__(self):
        self.W_h = np.array(self.W_h, dtype=np.float64)
        self.W_m = np.array(self.W_m, dtype=np.float64)
        if self.W_h.ndim != 2 or self.W_h.shape != self.W_m.shape:
            raise LipDomainError(f"kernel shapes differ or are not 2-D: {self.W_h.shape} vs {self.W_m.shape}")
        if not (np.all(np.isfinite(self.W_h)) and np.all(np.isfinite(self.W_m))):
            raise LipDomainError("kernel entries must be finite")

    @classmethod
    def zeros(cls, shape=(7, 7)):
        return cls(np.zeros(shape), np.zeros(shape))

    @classmethod
    def full_support(cls, shape=(7, 7), logit=FULL_SUPPORT_LOGIT):
        """Flat zero heights with every tap switched on."""
        return cls(np.zeros(shape), np.full(shape, float(logit)))

    def active(self):
        """Taps that take part in the extrema: logit above −HARD_MASK_LOGIT."""
        return self.W_m > -HARD_MASK_LOGIT

    @property
    def shape(self):
        return self.W_h.shape

    def copy(self):
        return KernelPair(self.W_h.copy(), self.W_m.copy())

    def as_dict(self):
        return {"W_h": self.W_h, "W_m": self.W_m}


def soft_mask(W_m):
    """Soft support V = χ(W_m) with the logistic sigmoid."""
    return expit(np.asarray(W_m, dtype=np.float64))


def effective_probes(kernels, bottom, M=DEFAULT_M):
    """
    Finite ξ-space structuring functions used by the layer.

    Args:
        kernels (KernelPair): Heights and mask logits
        bottom (float): Bottom value ⊥
        M (float): Ceiling

    Returns:
        tuple: (b̃_dil, b̃_ero) as A×B grids; b̃_dil is expressed on the reflected window
    """
    V = soft_mask(kernels.W_m)
    xi_h = xi(kernels.W_h, M=M)
    b_ero = xi_h * V + bottom * (1.0 - V)
    V_bar = V[::-1, ::-1]
    b_dil = -xi_h[::-1, ::-1] * V_bar + bottom * (1.0 - V_bar)
    return b_dil, b_ero


def sgd_update(kernels, grads, alpha):
    """Plain gradient step b ← b − α ∂L/∂b on both kernels."""
    return KernelPair(kernels.W_h - alpha * grads.W_h, kernels.W_m - alpha * grads.W_m)


@dataclass
class _ForwardCache:
    arg_dil: np.ndarray
    arg_ero: np.ndarray
    u: np.ndarray


class AsplundLayer:
    """
    Map of LIP-additive Asplund distances with a learnable probe.

    Args:
        shape (tuple): Window size (A, B). Ignored when ``kernels`` is given.
        M (float): Ceiling of the grey scale
        kernels (KernelPair, optional): Initial parameters. Defaults to zeros.
        tie_tolerance (float): Gap under which two taps count as tied
        track_ties (bool): Count tied pixels on every forward pass
    """

    def __init__(self, shape=(7, 7), M=DEFAULT_M, kernels=None, tie_tolerance=1e-6, track_ties=False):
        self.kernels = KernelPair.zeros(shape) if kernels is None else kernels
        self.M = float(M)
        self.bottom = bottom_value(self.M)
        self.tie_tolerance = tie_tolerance
        self.track_ties = track_ties
        self.last_tie_count = 0
        self.last_negative_count = 0
        self._negative_reported = False
        self._cache = None

    @classmethod
    def full_support(cls, shape=(7, 7), M=DEFAULT_M, logit=FULL_SUPPORT_LOGIT, **kwargs):
        """Layer started from flat zero heights on a fully open mask, so ĝ ≥ 0 up to 1e-3 in ξ."""
        return cls(M=M, kernels=KernelPair.full_support(shape, logit), **kwargs)

    @classmethod
    def from_probe(cls, probe, M=DEFAULT_M, logit=HARD_MASK_LOGIT, **kwargs):
        """Layer whose kernels approximate ``probe`` with a hard mask of ±logit."""
        W_h = np.where(probe.support, probe.heights, 0.0)
        W_m = np.where(probe.support, logit, -logit)
        return cls(M=M, kernels=KernelPair(W_h, W_m), **kwargs)

    @property
    def shape(self):
        return self.kernels.shape

    def _probes(self):
        rows, cols = self.shape
        b_dil, b_ero = effective_probes(self.kernels, self.bottom, self.M)
        centre = (rows // 2, cols // 2)
        reflected_centre = (rows - 1 - centre[0], cols - 1 - centre[1])
        support = self.kernels.active()
        if not support.any():
            # fully masked: keep every tap at its blended height
            support = np.ones(self.shape, dtype=bool)
        return Probe(b_dil, support[::-1, ::-1], reflected_centre), Probe(b_ero, support, centre)

    def _prepare(self, f):
        M = resolve_m(f, M=self.M)
        values = np.array(f.pixels if isinstance(f, LipImage) else f, dtype=np.float64)
        if np.any(values > M):
            raise LipDomainError(f"input pixels exceed M={M}")
        at_ceiling = values == M
        if at_ceiling.any():
            logger.warning("clamping %d input pixel(s) from M to M-1", int(at_ceiling.sum()))
            values[at_ceiling] = M - 1.0
        return xi(values, M=M)

    def _evaluate(self, xf):
        dil_probe, ero_probe = self._probes()
        upper, arg_dil = dilate_with_argmax(xf, dil_probe)
        lower, arg_ero = erode_with_argmin(xf, ero_probe)
        if self.track_ties:
            self.last_tie_count = count_near_ties(xf, dil_probe, upper, True, self.tie_tolerance) + count_near_ties(
                xf, ero_probe, lower, False, self.tie_tolerance
            )
        u = upper - lower
        negative = int(np.count_nonzero(u < 0))
        self.last_negative_count = negative
        if negative:
            if self._negative_reported:
                logger.debug("%d pixel(s) with negative dilation-erosion gap", negative)
            else:
                logger.warning(
                    "%d pixel(s) with negative dilation-erosion gap; outputs below 0 (reported once per layer)", negative
                )
                self._negative_reported = True
        return u, arg_dil, arg_ero

    def forward(self, f):
        """
        Compute ĝ and cache the routing needed by ``backward``.

        Args:
            f (LipImage or np.ndarray): Image(s) with values in (−∞, M]; leading batch axes allowed

        Returns:
            np.ndarray: ĝ, same shape as f
        """
        u, arg_dil, arg_ero = self._evaluate(self._prepare(f))
        self._cache = _ForwardCache(arg_dil, arg_ero, u)
        return xi_inv(u, M=self.M)

    def predict(self, f, chunk_size=512):
        """Forward pass without caching, evaluated in chunks along the first axis."""
        xf = self._prepare(f)
        if xf.ndim == 2:
            return xi_inv(self._evaluate(xf)[0], M=self.M)
        outputs = [xi_inv(self._evaluate(xf[i:i + chunk_size])[0], M=self.M) for i in range(0, len(xf), chunk_size)]
        return np.concatenate(outputs) if outputs else np.empty_like(xf)

    def routing(self):
        """Copies of the cached (dilation, erosion) winning-tap indices."""
        if self._cache is None:
            raise LayerStateError("no forward pass has been cached")
        return self._cache.arg_dil.copy(), self._cache.arg_ero.copy()

    def backward(self, grad_output):
        """
        Gradients of the loss with respect to W_h and W_m.

        Batch items are summed; scale ``grad_output`` by 1/N for a batch mean.

        Args:
            grad_output (np.ndarray): ∂L/∂ĝ, same shape as the last forward output

        Returns:
            KernelPair: (∂L/∂W_h, ∂L/∂W_m)

        Raises:
            LayerStateError: Without a matching forward pass
        """
        cache = self._cache
        if cache is None:
            raise LayerStateError("backward called without a cached forward pass")
        grad_output = np.asarray(grad_output, dtype=np.float64)
        if grad_output.shape != cache.u.shape:
            raise LayerStateError(f"gradient shape {grad_output.shape} does not match forward output {cache.u.shape}")
        self._cache = None

        rows, cols = self.shape
        taps = rows * cols
        # dĝ/du = exp(−u/M)
        grad_u = grad_output * np.exp(-cache.u / self.M)

        routed = cache.arg_dil >= 0
        grad_dil = np.bincount(cache.arg_dil[routed], weights=grad_u[routed], minlength=taps).reshape(rows, cols)
        routed = cache.arg_ero >= 0
        grad_ero = np.bincount(cache.arg_ero[routed], weights=grad_u[routed], minlength=taps).reshape(rows, cols)
        grad_dil = grad_dil[::-1, ::-1]

        W_h = self.kernels.W_h
        V = soft_mask(self.kernels.W_m)
        xi_h = xi(W_h, M=self.M)
        grad_W_h = xi_derivative(W_h, M=self.M) * V * (grad_ero - grad_dil)
        grad_W_m = V * (1.0 - V) * (grad_dil * (-xi_h - self.bottom) + grad_ero * (xi_h - self.bottom))
        return KernelPair(grad_W_h, grad_W_m)

    def probe(self, threshold=0.0):
        """Hard probe read off the kernels: support where W_m > threshold."""
        return Probe(self.kernels.W_h, self.kernels.W_m > threshold)
