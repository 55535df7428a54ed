"""Tsallis and Boltzmann-Gibbs-Shannon entropies of discrete distributions.

Also the composition checks for independent systems, the rescaled entropy,
the escort transform, the Jackson q-difference and Abe's route to the
entropy through it.
"""
import dataclasses
import math
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import entr
from sklearn.linear_model import LinearRegression

from qnilpotent.exceptions import DomainError
from qnilpotent.qalgebra import QLike, QParam, q_add

try:
    from ovos_utils.log import LOG
except ImportError:
    from logging import getLogger
    LOG = getLogger("qnilpotent")

#: Allowed deviation of the weight sum from 1.
NORMALIZATION_TOL = 1e-12


@dataclasses.dataclass(frozen=True)
class DiscreteDistribution:
    """Nonnegative weights summing to one, with optional support values.

    Instances are immutable; ``weights`` and ``support`` are stored as tuples.

    Args:
        weights: Probabilities of the atoms.
        support: Observable value of each atom, same length as ``weights``.
    """
    weights: Tuple[float, ...]
    support: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        weights = tuple(float(w) for w in self.weights)
        if not weights:
            raise DomainError("a distribution needs at least one atom")
        if any(not math.isfinite(w) or w < 0 for w in weights):
            raise DomainError("weights must be finite and nonnegative")
        total = math.fsum(weights)
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise DomainError(f"weights sum to {total!r}, not 1")
        object.__setattr__(self, "weights", weights)
        if self.support is not None:
            support = tuple(float(x) for x in self.support)
            if len(support) != len(weights):
                raise DomainError(f"support has {len(support)} points "
                                  f"for {len(weights)} weights")
            object.__setattr__(self, "support", support)

    def __len__(self) -> int:
        return len(self.weights)

    @property
    def p(self) -> np.ndarray:
        """Weights as a float array."""
        return np.asarray(self.weights, dtype=float)

    @property
    def x(self) -> np.ndarray:
        """Support as a float array.

        Raises:
            DomainError: if the distribution has no support.
        """
        if self.support is None:
            raise DomainError("distribution has no support values")
        return np.asarray(self.support, dtype=float)

    @classmethod
    def from_weights(cls, weights: Iterable[float],
                     support: Optional[Iterable[float]] = None,
                     normalize: bool = False) -> "DiscreteDistribution":
        """Build a distribution, optionally dividing by the weight sum first."""
        w = np.asarray(list(weights), dtype=float)
        if normalize:
            total = w.sum()
            if total <= 0:
                raise DomainError("cannot normalize weights with nonpositive sum")
            w = w / total
        return cls(tuple(w), None if support is None else tuple(support))

    @classmethod
    def uniform(cls, n: int,
                support: Optional[Iterable[float]] = None) -> "DiscreteDistribution":
        if n < 1:
            raise DomainError("uniform distribution needs n >= 1")
        return cls(tuple([1.0 / n] * n), None if support is None else tuple(support))

    def with_support(self, support: Iterable[float]) -> "DiscreteDistribution":
        return DiscreteDistribution(self.weights, tuple(support))


@dataclasses.dataclass(frozen=True)
class EntropyValue:
    """An entropy in units with ``k_B = 1``, tagged with its index."""
    value: float
    q: QParam

    def __float__(self) -> float:
        return self.value


@dataclasses.dataclass(frozen=True)
class GridDensity:
    """A density sampled on a uniform grid.

    Args:
        values: ``rho(x_i)`` at every cell centre.
        cell_volume: Common volume of a grid cell.
        support: Optional cell centres.
    """
    values: Tuple[float, ...]
    cell_volume: float
    support: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        if self.cell_volume <= 0:
            raise DomainError("cell volume must be positive")
        if any(v < 0 for v in self.values):
            raise DomainError("density values must be nonnegative")

    @classmethod
    def from_function(cls, density: Callable[[np.ndarray], np.ndarray],
                      lo: float, hi: float, n: int) -> "GridDensity":
        """Sample ``density`` at the ``n`` midpoints of ``[lo, hi]``."""
        if n < 1 or hi <= lo:
            raise DomainError("need n >= 1 cells on a nonempty interval")
        dx = (hi - lo) / n
        centres = lo + dx * (np.arange(n) + 0.5)
        values = np.asarray(density(centres), dtype=float)
        return cls(tuple(values), dx, tuple(centres))

    @property
    def mass(self) -> float:
        return math.fsum(self.values) * self.cell_volume

    def to_distribution(self) -> DiscreteDistribution:
        """Cell probabilities ``rho * dvol``, renormalized to absorb the
        quadrature error of the total mass."""
        mass = self.mass
        if abs(mass - 1.0) > 1e-3:
            LOG.warning(f"grid density integrates to {mass}, renormalizing")
        return DiscreteDistribution.from_weights(
            np.asarray(self.values) * self.cell_volume,
            self.support, normalize=True)


def _positive_part(p: DiscreteDistribution, q: QParam) -> np.ndarray:
    w = p.p
    if q.q < 0 and np.any(w == 0):
        raise DomainError(f"zero-weight atom makes p^q diverge for q={q.q}")
    # zero-weight atoms are outside the support and contribute nothing
    return w[w > 0]


def power_sum(p: DiscreteDistribution, t: float) -> float:
    """``sum_i p_i^t`` over the atoms with positive weight."""
    w = _positive_part(p, QParam(t))
    return math.fsum(np.power(w, t))


def tsallis_entropy(p: DiscreteDistribution, q: QLike) -> EntropyValue:
    """``S_q(p) = (1 - sum p_i^q) / (q - 1)``, BGS entropy at ``q = 1``.

    Evaluated as ``-sum p_i expm1((q - 1) ln p_i) / (q - 1)``, which equals
    the textbook form but keeps full precision as ``q`` approaches 1.

    Raises:
        DomainError: if ``q < 0`` and some weight is zero.
    """
    q = QParam.coerce(q)
    w = _positive_part(p, q)
    if not q.deformed:
        return EntropyValue(math.fsum(entr(w)), q)
    terms = w * np.expm1((q.q - 1.0) * np.log(w))
    return EntropyValue(-math.fsum(terms) / (q.q - 1.0), q)


def bgs_entropy(p: DiscreteDistribution) -> EntropyValue:
    return tsallis_entropy(p, QParam(1.0))


def tsallis_entropy_density(density: GridDensity, q: QLike) -> EntropyValue:
    """Entropy of a density by uniform-grid quadrature,
    ``(1 - sum rho_i^q dvol) / (q - 1)``."""
    q = QParam.coerce(q)
    rho = np.asarray(density.values, dtype=float)
    if q.q < 0 and np.any(rho == 0):
        raise DomainError(f"zero density makes rho^q diverge for q={q.q}")
    rho = rho[rho > 0]
    dv = density.cell_volume
    if not q.deformed:
        return EntropyValue(math.fsum(entr(rho)) * dv, q)
    integral = math.fsum(np.power(rho, q.q)) * dv
    return EntropyValue((1.0 - integral) / (q.q - 1.0), q)


def rescaled_entropy(p: DiscreteDistribution, q: QLike) -> EntropyValue:
    """``(1 - q) S_q(p)``, which composes under ``x + y + xy``."""
    q = QParam.coerce(q)
    return EntropyValue(q.gap * tsallis_entropy(p, q).value, q)


def product_distribution(p1: DiscreteDistribution,
                         p2: DiscreteDistribution) -> DiscreteDistribution:
    """Joint distribution of two independent systems.

    Atoms are ordered with ``p1``'s index varying slowest. When both have
    support, the joint support is dropped (pairs are not scalars). The
    joint weights are renormalized to sum to one.
    """
    return DiscreteDistribution.from_weights(np.outer(p1.p, p2.p).ravel(), normalize=True)


def composition_rhs(s1: EntropyValue, s2: EntropyValue, q: QLike) -> float:
    """Right-hand side of the composition law, ``s1 (+)_q s2``.

    Raises:
        DomainError: if the entropies were computed at a different index.
    """
    q = QParam.coerce(q)
    if s1.q != q or s2.q != q:
        raise DomainError("entropies must be computed at the same q")
    return q_add(s1.value, s2.value, q)


def pseudo_additivity_defect(p1: DiscreteDistribution, p2: DiscreteDistribution,
                             q: QLike) -> float:
    """``|S_q(p1 x p2) - (S_q(p1) (+)_q S_q(p2))|``."""
    q = QParam.coerce(q)
    joint = tsallis_entropy(product_distribution(p1, p2), q).value
    rhs = composition_rhs(tsallis_entropy(p1, q), tsallis_entropy(p2, q), q)
    return abs(joint - rhs)


def tilde_additivity_defect(p1: DiscreteDistribution, p2: DiscreteDistribution,
                            q: QLike) -> float:
    """Same check for the rescaled entropy under ``x + y + xy``."""
    q = QParam.coerce(q)
    joint = rescaled_entropy(product_distribution(p1, p2), q).value
    s1 = rescaled_entropy(p1, q).value
    s2 = rescaled_entropy(p2, q).value
    return abs(joint - q_add(s1, s2, 0.0))


def escort(p: DiscreteDistribution, q: QLike) -> DiscreteDistribution:
    """Escort distribution ``p_i^q / sum_j p_j^q``; support is carried over.

    Raises:
        DomainError: when a term diverges or the normalizer vanishes.
    """
    q = QParam.coerce(q)
    w = p.p
    if q.q < 0 and np.any(w == 0):
        raise DomainError(f"escort diverges on zero weights for q={q.q}")
    powered = np.zeros_like(w)
    mask = w > 0
    powered[mask] = np.power(w[mask], q.q)
    norm = math.fsum(powered)
    if norm == 0 or not math.isfinite(norm):
        raise DomainError(f"escort normalizer is {norm} for q={q.q}")
    return DiscreteDistribution(tuple(powered / norm), p.support)


def jackson_derivative(f: Callable[[float], float], q: QLike, x: float) -> float:
    """Jackson q-difference ``(f(qx) - f(x)) / ((q - 1) x)``.

    Raises:
        DomainError: at ``x = 0`` or ``q = 1``, where the ordinary derivative
            is the limit and must be taken by the caller.
    """
    q = QParam.coerce(q)
    if x == 0:
        raise DomainError("Jackson derivative is undefined at x = 0")
    if not q.deformed:
        raise DomainError("Jackson derivative is undefined at q = 1")
    return (f(q.q * x) - f(x)) / ((q.q - 1.0) * x)


def abe_entropy(p: DiscreteDistribution, q: QLike) -> EntropyValue:
    """Entropy through the Jackson derivative of ``t -> sum_i p_i^t`` at 1."""
    q = QParam.coerce(q)
    # validates q against zero atoms before differencing
    _positive_part(p, q)
    value = -jackson_derivative(lambda t: power_sum(p, t), q, 1.0)
    return EntropyValue(value, q)


@dataclasses.dataclass
class BGSLimitReport:
    """Distance to the BGS entropy along ``q = 1 +- 2^-j``."""
    qs: List[float]
    gaps: List[float]
    order: float


def bgs_limit_report(p: DiscreteDistribution,
                     exponents: Sequence[int] = tuple(range(1, 21))) -> BGSLimitReport:
    """Measure how fast ``S_q`` approaches the BGS entropy.

    Both sides of ``q = 1`` are sampled; ``order`` is the log-log slope of
    the gap against ``|q - 1|``.
    """
    s1 = bgs_entropy(p).value
    qs, gaps = [], []
    for j in exponents:
        for sign in (1.0, -1.0):
            q = 1.0 + sign * 2.0 ** (-j)
            qs.append(q)
            gaps.append(abs(tsallis_entropy(p, q).value - s1))
    dq = np.abs(np.asarray(qs) - 1.0)
    g = np.asarray(gaps)
    keep = g > 0
    if keep.sum() < 2:
        LOG.debug("entropy independent of q, BGS gap is identically zero")
        return BGSLimitReport(qs, gaps, float("inf"))
    reg = LinearRegression().fit(np.log(dq[keep]).reshape(-1, 1), np.log(g[keep]))
    return BGSLimitReport(qs, gaps, float(reg.coef_[0]))


def parse_distribution(text: str) -> DiscreteDistribution:
    """Parse ``w1,w2,...`` into a distribution."""
    try:
        weights = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as e:
        raise DomainError(f"malformed weight list {text!r}") from e
    return DiscreteDistribution.from_weights(weights)


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def load_distribution_csv(csv_path: str) -> DiscreteDistribution:
    """Load a distribution from a CSV with one ``weight[,x]`` row per atom.

    A first line with no numeric field at all is treated as a header; any
    other unparsable field is an error.

    Raises:
        DomainError: on a malformed row or an empty file.
    """
    weights: List[float] = []
    support: List[float] = []
    with open(csv_path) as f:
        lines = [l.strip() for l in f.read().split("\n") if l.strip()]
    if lines and not any(_is_number(c) for c in lines[0].split(",")):
        lines = lines[1:]
    if not lines:
        raise DomainError(f"{csv_path}: no rows")
    for idx, line in enumerate(lines):
        try:
            row = [float(c) for c in line.split(",")]
        except ValueError:
            raise DomainError(f"{csv_path}: malformed row {idx + 1}: {line!r}")
        weights.append(row[0])
        if len(row) > 1:
            support.append(row[1])
    if support and len(support) != len(weights):
        raise DomainError(f"{csv_path}: some rows have x values and some do not")
    return DiscreteDistribution.from_weights(weights, support or None)
