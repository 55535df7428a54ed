"""The 3x3 unipotent upper-triangular group and its Lie algebra.

Matrices are stored by their three strictly-upper entries::

    | 1  a12  a13 |
    | 0   1   a23 |
    | 0   0    1  |

The Lie algebra is spanned by ``X`` (entry 12), ``Y`` (entry 23) and
``Z`` (entry 13) with ``[X, Y] = Z`` and every other bracket zero. The
group is 2-step nilpotent, so ``exp`` and ``log`` are finite sums and the
Baker-Campbell-Hausdorff series stops after the first bracket.
"""
import dataclasses
from typing import List

import numpy as np


#: Coordinate convention of :func:`group_law`, reported by the CLI.
GROUP_LAW_CONVENTION = "exponential (z' = z1 + z2 + (x1*y2 - y1*x2)/2)"


@dataclasses.dataclass(frozen=True)
class UpperUnitriangular:
    a12: float
    a13: float
    a23: float

    @classmethod
    def identity(cls) -> "UpperUnitriangular":
        return cls(0.0, 0.0, 0.0)

    def __matmul__(self, other: "UpperUnitriangular") -> "UpperUnitriangular":
        return multiply(self, other)

    def inverse(self) -> "UpperUnitriangular":
        return UpperUnitriangular(-self.a12, self.a12 * self.a23 - self.a13, -self.a23)

    def as_matrix(self) -> np.ndarray:
        """Dense 3x3 form, for display only."""
        return np.array([[1.0, self.a12, self.a13],
                         [0.0, 1.0, self.a23],
                         [0.0, 0.0, 1.0]])

    def rows(self) -> List[List[float]]:
        return self.as_matrix().tolist()


@dataclasses.dataclass(frozen=True)
class LieVector:
    """Coefficients on the ``X, Y, Z`` basis."""
    cx: float
    cy: float
    cz: float

    def __add__(self, other: "LieVector") -> "LieVector":
        return LieVector(self.cx + other.cx, self.cy + other.cy, self.cz + other.cz)

    def __sub__(self, other: "LieVector") -> "LieVector":
        return LieVector(self.cx - other.cx, self.cy - other.cy, self.cz - other.cz)

    def scale(self, s: float) -> "LieVector":
        return LieVector(s * self.cx, s * self.cy, s * self.cz)

    def as_matrix(self) -> np.ndarray:
        return np.array([[0.0, self.cx, self.cz],
                         [0.0, 0.0, self.cy],
                         [0.0, 0.0, 0.0]])


X = LieVector(1.0, 0.0, 0.0)
Y = LieVector(0.0, 1.0, 0.0)
Z = LieVector(0.0, 0.0, 1.0)


@dataclasses.dataclass(frozen=True)
class HeisenbergPoint:
    """Exponential coordinates ``(x, y, z)``: the point ``exp(xX + yY + zZ)``."""
    x: float
    y: float
    z: float

    @classmethod
    def origin(cls) -> "HeisenbergPoint":
        return cls(0.0, 0.0, 0.0)

    def inverse(self) -> "HeisenbergPoint":
        return HeisenbergPoint(-self.x, -self.y, -self.z)

    def __mul__(self, other: "HeisenbergPoint") -> "HeisenbergPoint":
        return group_law(self, other)

    def as_tuple(self):
        return self.x, self.y, self.z


def embed(x: float) -> UpperUnitriangular:
    """Place ``x`` in all three free entries."""
    return UpperUnitriangular(x, x, x)


def multiply(a: UpperUnitriangular, b: UpperUnitriangular) -> UpperUnitriangular:
    """Matrix product.

    For ``embed(x) @ embed(y)`` the off-corner entries are ``x + y`` and the
    corner is ``x + y + xy``.
    """
    return UpperUnitriangular(a.a12 + b.a12,
                              a.a13 + b.a13 + a.a12 * b.a23,
                              a.a23 + b.a23)


def embedding_defect(x: float, y: float) -> float:
    """How far ``embed(x) @ embed(y)`` is from the image of :func:`embed`.

    The product has ``x + y`` off the corner but ``x + y + xy`` in it, so
    it equals some ``embed(s)`` only when ``xy == 0``. Returns
    ``|(x + y) - (x (+)_0 y)| = |xy|``.
    """
    return abs(x * y)


def bracket(u: LieVector, v: LieVector) -> LieVector:
    return LieVector(0.0, 0.0, u.cx * v.cy - v.cx * u.cy)


def exp_map(u: LieVector) -> UpperUnitriangular:
    """``I + M + M^2 / 2``; ``M^3 = 0``."""
    return UpperUnitriangular(u.cx, u.cz + u.cx * u.cy / 2, u.cy)


def log_map(a: UpperUnitriangular) -> LieVector:
    """``N - N^2 / 2`` with ``N = A - I``."""
    return LieVector(a.a12, a.a23, a.a13 - a.a12 * a.a23 / 2)


def to_point(a: UpperUnitriangular) -> HeisenbergPoint:
    v = log_map(a)
    return HeisenbergPoint(v.cx, v.cy, v.cz)


def from_point(g: HeisenbergPoint) -> UpperUnitriangular:
    return exp_map(LieVector(g.x, g.y, g.z))


def group_law(g: HeisenbergPoint, h: HeisenbergPoint) -> HeisenbergPoint:
    """Product in exponential coordinates (truncated BCH)."""
    return HeisenbergPoint(g.x + h.x, g.y + h.y,
                           g.z + h.z + (g.x * h.y - g.y * h.x) / 2)


def group_commutator(g: HeisenbergPoint, h: HeisenbergPoint) -> HeisenbergPoint:
    """``g h g^-1 h^-1``, always central."""
    return group_law(group_law(g, h), group_law(g.inverse(), h.inverse()))


def polarized_law(g, h):
    """Matrix-coordinate product ``(x, y, z) = (a12, a23, a13)``.

    Works on plain tuples and keeps integer coordinates integral.
    """
    return g[0] + h[0], g[1] + h[1], g[2] + h[2] + g[0] * h[1]


def bch_defect(u: LieVector, v: LieVector, relative: bool = False) -> float:
    """Largest entry of ``exp(u) exp(v) - exp(u + v + [u, v] / 2)``.

    With ``relative`` the defect is divided by ``max(1, m)``, where ``m``
    bounds the terms the entries are summed from.
    """
    lhs = multiply(exp_map(u), exp_map(v))
    rhs = exp_map(u + v + bracket(u, v).scale(0.5))
    defect = max(abs(lhs.a12 - rhs.a12), abs(lhs.a13 - rhs.a13), abs(lhs.a23 - rhs.a23))
    if not relative:
        return defect
    xs, ys = abs(u.cx) + abs(v.cx), abs(u.cy) + abs(v.cy)
    magnitude = xs + ys + xs * ys + abs(u.cz) + abs(v.cz)
    return defect / max(1.0, magnitude)
