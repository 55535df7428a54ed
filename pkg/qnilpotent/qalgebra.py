"""Generalized addition and the deformed exponential/logarithm pair.

The entropic index ``q`` deforms ordinary addition into
``x (+)_q y = x + y + (1 - q) x y``. :func:`tau` maps that operation back
onto ``+``, and :func:`q_exp` / :func:`q_log` are the matching deformed
exponential and logarithm.

All functions are pure. Close to ``q = 1`` (within :data:`EPS_SWITCH`)
the first order expansion in ``1 - q`` is used instead of the closed form,
whose denominators vanish there.
"""
import dataclasses
import math
from functools import reduce
from typing import Iterable, Union

import numpy as np

from qnilpotent.exceptions import DomainError, SingularElement

ArrayOrFloat = Union[float, np.ndarray]

#: ``|q - 1|`` below which the undeformed limit formulas are used.
EPS_SWITCH = 1e-8


@dataclasses.dataclass(frozen=True)
class QParam:
    """The entropic index ``q``.

    Args:
        q: Finite real index. ``q = 1`` is the Boltzmann-Gibbs-Shannon case.
    """
    q: float

    def __post_init__(self):
        if not math.isfinite(self.q):
            raise DomainError(f"entropic index must be finite, got {self.q}")
        object.__setattr__(self, "q", float(self.q))

    @property
    def deformed(self) -> bool:
        """True when ``q`` is far enough from 1 to use the deformed formulas."""
        return abs(self.q - 1.0) > EPS_SWITCH

    @property
    def gap(self) -> float:
        """The deformation ``1 - q``."""
        return 1.0 - self.q

    def dual(self) -> "QParam":
        """The index ``2 - q``."""
        return QParam(2.0 - self.q)

    @classmethod
    def coerce(cls, q: Union["QParam", float]) -> "QParam":
        if isinstance(q, QParam):
            return q
        return cls(q)


QLike = Union[QParam, float]


def q_add(x: ArrayOrFloat, y: ArrayOrFloat, q: QLike) -> ArrayOrFloat:
    """Generalized addition ``x + y + (1 - q) x y``.

    ``q = 1`` gives ordinary addition and ``q = 0`` gives ``x + y + xy``,
    the law obeyed by the rescaled entropy.
    """
    q = QParam.coerce(q)
    return x + y + (1 - q.q) * x * y


def q_add_many(values: Iterable[float], q: QLike) -> float:
    """Fold :func:`q_add` over ``values``; the empty fold is 0."""
    q = QParam.coerce(q)
    return reduce(lambda acc, v: q_add(acc, v, q), values, 0.0)


def q_negate(x: float, q: QLike) -> float:
    """Inverse of ``x`` for :func:`q_add`.

    Raises:
        SingularElement: if ``1 + (1 - q) x == 0``.
    """
    q = QParam.coerce(q)
    denom = 1 + q.gap * x
    if denom == 0:
        raise SingularElement(f"{x} has no inverse for q={q.q}")
    return -x / denom


def tau(x: ArrayOrFloat, q: QLike) -> ArrayOrFloat:
    """Isomorphism taking :func:`q_add` onto ordinary addition.

    ``tau(x) = log(1 + (1 - q) x) / (1 - q)``, and ``x`` itself at ``q = 1``.

    Raises:
        DomainError: if ``1 + (1 - q) x <= 0``.
    """
    q = QParam.coerce(q)
    x_arr = np.asarray(x, dtype=float)
    if np.any(1 + q.gap * x_arr <= 0):
        raise DomainError(f"tau undefined: 1 + (1 - q) x <= 0 for q={q.q}")
    if q.deformed:
        out = np.log1p(q.gap * x_arr) / q.gap
    else:
        out = x_arr - q.gap * x_arr * x_arr / 2
    return _like(out, x)


def q_exp(x: ArrayOrFloat, q: QLike) -> ArrayOrFloat:
    """Deformed exponential with the cutoff convention.

    ``[1 + (1 - q) x]^(1 / (1 - q))`` where the bracket is positive, 0
    elsewhere. Equals ``exp(tau(x))`` on the positive part.
    """
    q = QParam.coerce(q)
    x_arr = np.asarray(x, dtype=float)
    bracket = 1 + q.gap * x_arr
    positive = bracket > 0
    safe = np.where(positive, x_arr, 0.0)
    if q.deformed:
        log_val = np.log1p(q.gap * safe) / q.gap
    else:
        log_val = safe - q.gap * safe * safe / 2
    out = np.where(positive, np.exp(log_val), 0.0)
    return _like(out, x)


def q_log(x: ArrayOrFloat, q: QLike) -> ArrayOrFloat:
    """Deformed logarithm ``(x^(1 - q) - 1) / (1 - q)``.

    Raises:
        DomainError: for ``x <= 0``.
    """
    q = QParam.coerce(q)
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr <= 0):
        raise DomainError("q_log is only defined for positive arguments")
    ln = np.log(x_arr)
    if q.deformed:
        out = np.expm1(q.gap * ln) / q.gap
    else:
        out = ln + q.gap * ln * ln / 2
    return _like(out, x)


def _like(out: np.ndarray, template: ArrayOrFloat) -> ArrayOrFloat:
    # scalars in, scalars out
    if np.ndim(template) == 0:
        return float(out)
    return out
