"""Exponential weighting and the mix loss, both evaluated with a min-shift.

``UNBOUNDED`` stands for an infinite learning rate.  It only arises when
every prediction seen so far coincides, and is handled as the eta -> inf
limit: weights go uniform over the argmin of the losses and the mix loss
becomes the smallest loss on the weights' support.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import InputError, PreconditionError

UNBOUNDED = math.inf


def is_unbounded(eta) -> bool:
    return eta is not None and math.isinf(eta)


def weights_from_losses(losses, eta: float) -> np.ndarray:
    """Return ``w_n ∝ exp(-eta * L_n)`` normalised onto the simplex.

    The exponent is shifted by ``min L`` so the largest term is exactly 1;
    the normaliser therefore never underflows, whatever the spread of ``L``.
    """
    L = np.asarray(losses, dtype=np.float64)
    if L.ndim != 1 or L.shape[0] == 0:
        raise InputError("losses must be a non-empty 1-D sequence")
    if not np.isfinite(L).all():
        raise InputError("losses must be finite")
    if eta is None or not eta > 0:
        raise PreconditionError(f"learning rate must be positive, got {eta!r}")
    return _weights(L, eta)


def _weights(L: np.ndarray, eta: float) -> np.ndarray:
    lo = L.min()
    if is_unbounded(eta):
        support = L == lo
        return support / float(support.sum())
    z = np.exp(-eta * (L - lo))
    return z / z.sum()


def mixloss(weights, losses, eta: float) -> float:
    """Mix loss ``-(1/eta) * ln sum_n w_n exp(-eta * l_n)``.

    Lies between the smallest and the largest loss on the support of ``w``
    and is nonincreasing in ``eta``.
    """
    w = np.asarray(weights, dtype=np.float64)
    l = np.asarray(losses, dtype=np.float64)
    if w.shape != l.shape or w.ndim != 1 or w.shape[0] == 0:
        raise PreconditionError("weights and losses must be 1-D of equal length")
    if not (np.isfinite(w).all() and np.isfinite(l).all()):
        raise PreconditionError("weights and losses must be finite")
    if eta is None or not eta > 0:
        raise PreconditionError(f"eta must be positive, got {eta!r}")
    if not (w > 0).any():
        raise PreconditionError("weights have empty support")
    return _mixloss(w, l, eta)


def _mixloss(w: np.ndarray, l: np.ndarray, eta: float) -> float:
    if w.min() <= 0:
        support = w > 0
        w, l = w[support], l[support]
    lo = float(l.min())
    if is_unbounded(eta):
        return lo
    s = float(np.dot(w, np.exp(-eta * (l - lo))))
    return lo - math.log(s) / eta
