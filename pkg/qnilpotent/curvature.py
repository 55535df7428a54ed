"""Hyperbolic curvature attached to the entropic index.

``k(q) = -(log(2 - q))^2`` is checked against the Gaussian curvature of the
warped metric ``ds^2 = dx^2 + exp(2 a x) dy^2`` (constant curvature
``-a^2``), computed numerically with the Brioschi formula.
"""
import dataclasses
import io
import math
from typing import Iterable, List, NamedTuple, Optional, Tuple

import numpy as np

from qnilpotent.config import setting
from qnilpotent.exceptions import DomainError
from qnilpotent.qalgebra import QLike, QParam


def curvature_of_q(q: QLike) -> float:
    """Sectional curvature ``-(log(2 - q))^2``; zero exactly at ``q = 1``.

    Raises:
        DomainError: for ``q >= 2``.
    """
    q = QParam.coerce(q)
    if q.q >= 2:
        raise DomainError(f"curvature is only defined for q < 2, got {q.q}")
    return -math.log(2.0 - q.q) ** 2


def reflected_index(q: QLike) -> float:
    """The other index with the same curvature.

    The dual indices ``2 - q`` of the pair are reciprocal, so ``q = 1`` is
    the only fixed point.

    Raises:
        DomainError: for ``q >= 2``.
    """
    dual = QParam.coerce(q).dual()
    if dual.q <= 0:
        raise DomainError(f"reflection is only defined for q < 2, got {2.0 - dual.q}")
    return 2.0 - 1.0 / dual.q


class CurvatureBranches(NamedTuple):
    """The two indices with a given curvature, ``2 - e^-a`` and ``2 - e^a``.

    ``below_one`` is the branch with ``q <= 1``.
    """
    above_one: float
    below_one: float


def q_of_curvature(k: float) -> CurvatureBranches:
    """Both solutions of ``curvature_of_q(q) = k``; no branch is preferred.

    Raises:
        DomainError: for ``k > 0``.
    """
    if k > 0:
        raise DomainError(f"curvature must be nonpositive, got {k}")
    a = math.sqrt(-k)
    return CurvatureBranches(2.0 - math.exp(-a), 2.0 - math.exp(a))


@dataclasses.dataclass(frozen=True)
class ModelMetric:
    """``E = 1, F = 0, G = exp(2 a x)`` with curvature ``k = -a^2``."""
    k: float
    a: float

    def __post_init__(self):
        if self.k > 0 or self.a < 0:
            raise DomainError("model metric needs k <= 0 and a >= 0")
        if not math.isclose(self.a * self.a, -self.k, rel_tol=1e-12, abs_tol=1e-300):
            raise DomainError(f"a = {self.a} does not match k = {self.k}")

    @classmethod
    def from_curvature(cls, k: float) -> "ModelMetric":
        if k > 0:
            raise DomainError(f"curvature must be nonpositive, got {k}")
        return cls(k, math.sqrt(-k))

    @classmethod
    def from_q(cls, q: QLike) -> "ModelMetric":
        q = QParam.coerce(q)
        k = curvature_of_q(q)
        return cls(k, abs(math.log(2.0 - q.q)))

    def components(self, x: float, y: float) -> Tuple[float, float, float]:
        return 1.0, 0.0, math.exp(2 * self.a * x)


def _derivatives(fn, u: float, v: float, h: float):
    """Central differences: value, d/du, d/dv, d2/du2, d2/dv2, d2/dudv."""
    f0 = fn(u, v)
    fu_p, fu_m = fn(u + h, v), fn(u - h, v)
    fv_p, fv_m = fn(u, v + h), fn(u, v - h)
    fuv = (fn(u + h, v + h) - fn(u + h, v - h)
           - fn(u - h, v + h) + fn(u - h, v - h)) / (4 * h * h)
    return (f0,
            (fu_p - fu_m) / (2 * h),
            (fv_p - fv_m) / (2 * h),
            (fu_p - 2 * f0 + fu_m) / (h * h),
            (fv_p - 2 * f0 + fv_m) / (h * h),
            fuv)


def gaussian_curvature_numeric(m: ModelMetric, at: Tuple[float, float],
                               h: Optional[float] = None) -> float:
    """Brioschi formula with finite differences of step ``h``; error O(h^2).

    Raises:
        DomainError: for ``h <= 0``.
    """
    h = setting(h, "curvature", "step")
    if not h > 0:
        raise DomainError("finite difference step must be positive")
    u, v = at
    E, E_u, E_v, E_uu, E_vv, E_uv = _derivatives(lambda a, b: m.components(a, b)[0], u, v, h)
    F, F_u, F_v, F_uu, F_vv, F_uv = _derivatives(lambda a, b: m.components(a, b)[1], u, v, h)
    G, G_u, G_v, G_uu, G_vv, G_uv = _derivatives(lambda a, b: m.components(a, b)[2], u, v, h)

    first = np.array([
        [-E_vv / 2 + F_uv - G_uu / 2, E_u / 2, F_u - E_v / 2],
        [F_v - G_u / 2, E, F],
        [G_v / 2, F, G],
    ])
    second = np.array([
        [0.0, E_v / 2, G_u / 2],
        [E_v / 2, E, F],
        [G_u / 2, F, G],
    ])
    return float((np.linalg.det(first) - np.linalg.det(second)) / (E * G - F * F) ** 2)


def curvature_table(qs: Iterable[float], h: Optional[float] = None,
                    at: Tuple[float, float] = (0.0, 0.0)) -> List[Tuple[float, float, float]]:
    """Rows ``(q, k(q), numeric k)`` for plotting."""
    rows = []
    for q in qs:
        metric = ModelMetric.from_q(q)
        rows.append((float(q), curvature_of_q(q), gaussian_curvature_numeric(metric, at, h)))
    return rows


def table_to_csv(rows: List[Tuple[float, float, float]]) -> str:
    buf = io.StringIO()
    buf.write("q,k,k_numeric\n")
    for q, k, kn in rows:
        buf.write(f"{q!r},{k!r},{kn!r}\n")
    return buf.getvalue()
