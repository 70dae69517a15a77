"""Standard-normal primitives shared by every cost function.

All functions accept a float or a numpy array and return the same kind.
The cumulative uses the Cephes ``ndtr`` routine (erfc based), which is
accurate to a few ulps over the whole real line, including both tails.
"""

import math

import numpy as np
from scipy import special

__all__ = ["phi", "Phi", "Q", "g", "h", "log_Phi"]

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)

# past this point phi(x) underflows and g is computed from its asymptote
_TAIL = 39.0


def _ret(x):
    if np.ndim(x) == 0:
        return float(x)
    return x


def phi(x):
    """Density of the standard normal."""
    x = np.asarray(x, dtype=float)
    return _ret(_INV_SQRT_2PI * np.exp(-0.5 * x * x))


def Phi(x):
    """Cumulative distribution of the standard normal."""
    return _ret(special.ndtr(np.asarray(x, dtype=float)))


def Q(x):
    """Upper tail 1 - Phi(x), computed without cancellation."""
    return _ret(special.ndtr(-np.asarray(x, dtype=float)))


def log_Phi(x):
    return _ret(special.log_ndtr(np.asarray(x, dtype=float)))


def g(delta):
    """Normalized expected overflow ``phi(d) - d * (1 - Phi(d))``.

    A bin with spare capacity ``delta`` standard deviations has expected
    overflow ``sigma * g(delta)``. For negative arguments the identity
    ``g(d) = g(-d) - d`` is used so that no large terms cancel.
    """
    d = np.asarray(delta, dtype=float)
    a = np.abs(d)
    with np.errstate(invalid="ignore", over="ignore"):
        core = _INV_SQRT_2PI * np.exp(-0.5 * a * a) - a * special.ndtr(-a)
    core = np.where(a > _TAIL, 0.0, core)
    # the exact value is positive; rounding can leave a tiny negative
    core = np.maximum(core, 0.0)
    return _ret(core + np.maximum(-d, 0.0))


def h(delta):
    """Ratio ``phi(d) / Phi(d)``, the derivative of ``log Phi``.

    The left tail uses the scaled complementary error function so the
    ratio stays finite where both numerator and denominator underflow.
    """
    d = np.asarray(delta, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        right = _INV_SQRT_2PI * np.exp(-0.5 * d * d) / special.ndtr(d)
        left = _SQRT_2_OVER_PI / special.erfcx(-d / math.sqrt(2.0))
    return _ret(np.where(d >= 0.0, right, left))
