"""
LIP (Logarithmic Image Processing) arithmetic on grey levels and images.

Grey levels live in the inverted scale of the LIP model: 0 is white and the
ceiling M is black. Every function works elementwise on scalars, numpy arrays
or LipImage objects. The M constant is taken from LipImage operands when
present, else from the ``M`` keyword, and all of them must agree.
"""

from dataclasses import dataclass

import numpy as np

from src.errors import LipConfigurationError, LipDomainError

DEFAULT_M = 256.0


@dataclass(frozen=True, eq=False)
class LipImage:
    """
    A 2-D grid of grey levels (optionally with leading batch axes) and its ceiling M.

    Args:
        pixels (np.ndarray): Grey values; promoted to float64
        M (float): Dynamic-range ceiling. Defaults to 256.
    """

    pixels: np.ndarray
    M: float = DEFAULT_M

    def __post_init__(self):
        object.__setattr__(self, "pixels", np.asarray(self.pixels, dtype=np.float64))
        object.__setattr__(self, "M", _check_m(self.M))
        if self.pixels.ndim < 2:
            raise LipDomainError(f"an image needs at least 2 dimensions, got shape {self.pixels.shape}")

    @property
    def shape(self):
        return self.pixels.shape

    @property
    def height(self):
        return self.pixels.shape[-2]

    @property
    def width(self):
        return self.pixels.shape[-1]

    def with_pixels(self, pixels):
        """Return a new image sharing this image's M."""
        return LipImage(pixels, self.M)


def _check_m(M):
    M = float(M)
    if not np.isfinite(M) or M <= 0:
        raise LipConfigurationError(f"M must be a positive finite number, got {M}")
    return M


def resolve_m(*operands, M=None):
    """
    Find the M constant shared by the operands.

    Args:
        *operands: Scalars, arrays or LipImage objects
        M (float, optional): Explicit ceiling; must agree with any LipImage operand

    Returns:
        float: The common ceiling (DEFAULT_M if nothing specifies one)

    Raises:
        LipConfigurationError: If two sources disagree
    """
    found = None if M is None else _check_m(M)
    for operand in operands:
        if isinstance(operand, LipImage):
            if found is not None and operand.M != found:
                raise LipConfigurationError(f"mismatched M constants: {found} and {operand.M}")
            found = operand.M
    return DEFAULT_M if found is None else found


def _values(a):
    if isinstance(a, LipImage):
        return a.pixels
    return np.asarray(a, dtype=np.float64)


def _wrap(result, M, *operands):
    if any(isinstance(operand, LipImage) for operand in operands):
        return LipImage(result, M)
    return result


def _require_below(values, M, name):
    if np.any(values >= M):
        raise LipDomainError(f"{name} must be strictly below M={M}")


def lip_add(a, b, M=None):
    """LIP-addition a ⊕ b = a + b − a·b/M."""
    M = resolve_m(a, b, M=M)
    x, y = _values(a), _values(b)
    _require_below(x, M, "lip_add operand")
    _require_below(y, M, "lip_add operand")
    return _wrap(x + y - x * y / M, M, a, b)


def lip_scalar_mul(lam, a, M=None):
    """LIP scalar multiplication λ ⊗ a = M − M(1 − a/M)^λ."""
    M = resolve_m(a, M=M)
    x = _values(a)
    _require_below(x, M, "lip_scalar_mul operand")
    return _wrap(M - M * np.power(1.0 - x / M, lam), M, a)


def lip_negate(a, M=None):
    """LIP opposite ⊖a = −a / (1 − a/M)."""
    M = resolve_m(a, M=M)
    x = _values(a)
    _require_below(x, M, "lip_negate operand")
    return _wrap(-x / (1.0 - x / M), M, a)


def lip_sub(a, b, M=None):
    """LIP-subtraction a ⊖ b = (a − b) / (1 − b/M)."""
    M = resolve_m(a, b, M=M)
    x, y = _values(a), _values(b)
    _require_below(x, M, "lip_sub operand")
    _require_below(y, M, "lip_sub operand")
    return _wrap((x - y) / (1.0 - y / M), M, a, b)


def xi(a, M=None):
    """
    Isomorphism ξ(a) = −M ln(1 − a/M) mapping LIP arithmetic onto ordinary arithmetic.

    By convention ξ(M) = +∞ and ξ(−∞) = −∞.

    Raises:
        LipDomainError: If any value exceeds M
    """
    M = resolve_m(a, M=M)
    x = _values(a)
    if np.any(x > M):
        raise LipDomainError(f"xi is undefined above M={M}")
    with np.errstate(divide="ignore"):
        return -M * np.log1p(-x / M)


def xi_inv(u, M=DEFAULT_M):
    """Inverse isomorphism ξ⁻¹(u) = M(1 − exp(−u/M)); ξ⁻¹(+∞) = M, ξ⁻¹(−∞) = −∞."""
    M = _check_m(M)
    u = np.asarray(u, dtype=np.float64)
    with np.errstate(over="ignore"):
        return -M * np.expm1(-u / M)


def xi_derivative(a, M=DEFAULT_M):
    """Derivative ξ'(a) = 1 / (1 − a/M)."""
    return 1.0 / (1.0 - np.asarray(a, dtype=np.float64) / M)


def bottom_value(M=DEFAULT_M):
    """Finite stand-in ⊥ = −ξ(M − 1) for −∞ in the learnable probes."""
    return -float(xi(M - 1.0, M=M))
