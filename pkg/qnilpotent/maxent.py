"""Maximum Tsallis entropy on a finite support under escort-moment constraints.

Constraints on escort moments are linear in the escort weights
``P = p^q / sum p^q``. Written in ``P`` the problem becomes the
maximization of ``sum_i phi(P_i)`` with ``phi(P) = (P^s - P) / (1 - s)``
and ``s = 1 / q`` (``-P log P`` at ``q = 1``), a concave objective over the
simplex cut by affine constraints, so the optimum is unique. Stationarity
gives ``P`` in closed form from the multipliers; the multipliers minimize
the convex dual and are found by damped Newton iterations. The
distribution itself is ``p = P^s / sum P^s``.
"""
import dataclasses
import io
import json
import math
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from qnilpotent.config import setting
from qnilpotent.entropy import DiscreteDistribution, EntropyValue, escort, tsallis_entropy
from qnilpotent.exceptions import ConvergenceFailure, DomainError, Infeasible
from qnilpotent.qalgebra import QLike, QParam

try:
    from ovos_utils.log import LOG
except ImportError:
    from logging import getLogger
    LOG = getLogger("qnilpotent")


class ConstraintKind(str, Enum):
    ORDINARY_MEAN = "ordinary-mean"
    ESCORT_MEAN = "escort-mean"
    ESCORT_VARIANCE = "escort-variance"


@dataclasses.dataclass(frozen=True)
class Constraint:
    kind: ConstraintKind
    target: float

    def __post_init__(self):
        object.__setattr__(self, "kind", ConstraintKind(self.kind))
        object.__setattr__(self, "target", float(self.target))


@dataclasses.dataclass(frozen=True)
class MaxentProblem:
    """Support grid, entropic index and moment constraints.

    ``escort-variance`` is the escort second moment about the
    ``escort-mean`` target, so it requires an ``escort-mean`` constraint.
    ``ordinary-mean`` is only accepted at ``q = 1``, where it coincides
    with the escort mean.
    """
    support: Tuple[float, ...]
    q: QParam
    constraints: Tuple[Constraint, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "support", tuple(float(x) for x in self.support))
        object.__setattr__(self, "q", QParam.coerce(self.q))
        object.__setattr__(self, "constraints", tuple(
            c if isinstance(c, Constraint) else Constraint(**c) for c in self.constraints))
        if len(set(self.support)) < 2:
            raise DomainError("support needs at least two distinct points")
        if self.q.q <= 0:
            raise DomainError(f"escort maxent needs q > 0, got {self.q.q}")
        kinds = [c.kind for c in self.constraints]
        if len(set(kinds)) != len(kinds):
            raise DomainError("each constraint kind may appear once")
        if ConstraintKind.ORDINARY_MEAN in kinds:
            if self.q.deformed:
                raise DomainError("ordinary-mean constraints are only offered at q = 1")
            if ConstraintKind.ESCORT_MEAN in kinds:
                raise DomainError("ordinary-mean and escort-mean coincide at q = 1")
        if ConstraintKind.ESCORT_VARIANCE in kinds and ConstraintKind.ESCORT_MEAN not in kinds:
            raise DomainError("escort-variance requires an escort-mean constraint")

    @property
    def x(self) -> np.ndarray:
        return np.asarray(self.support, dtype=float)

    def target(self, kind: ConstraintKind) -> Optional[float]:
        for c in self.constraints:
            if c.kind == kind:
                return c.target
        return None

    @classmethod
    def from_dict(cls, doc: Dict) -> "MaxentProblem":
        """Build from ``{"support": [...] | "grid": {lo, hi, n}, "q": .., "constraints": [..]}``.

        Raises:
            DomainError: on a missing field, an unknown constraint kind or a
                non-numeric value.
        """
        if not isinstance(doc, dict):
            raise DomainError("problem must be a JSON object")
        try:
            if "support" in doc:
                support = tuple(float(x) for x in doc["support"])
            elif "grid" in doc:
                grid = doc["grid"]
                support = tuple(np.linspace(float(grid["lo"]), float(grid["hi"]),
                                            int(grid["n"])).tolist())
            else:
                raise DomainError("problem needs 'support' or 'grid'")
            constraints = tuple(Constraint(c["kind"], c["target"])
                                for c in doc.get("constraints", []))
            q = QParam(float(doc.get("q", 1.0)))
        except DomainError:
            raise
        except KeyError as e:
            raise DomainError(f"malformed problem: missing field {e}") from e
        except (TypeError, ValueError) as e:
            raise DomainError(f"malformed problem: {e}") from e
        return cls(support, q, constraints)

    @classmethod
    def from_json(cls, path: str) -> "MaxentProblem":
        with open(path) as f:
            try:
                doc = json.load(f)
            except json.JSONDecodeError as e:
                raise DomainError(f"problem file {path} is not valid JSON: {e}") from e
        return cls.from_dict(doc)


@dataclasses.dataclass
class MaxentSolution:
    """Optimal distribution with its multipliers.

    ``multipliers[0]`` belongs to normalization, the rest follow the order of
    the problem's constraints.
    """
    distribution: DiscreteDistribution
    multipliers: List[float]
    kkt_residual: float
    iterations: int
    entropy: Optional[EntropyValue] = None
    moments: Dict[str, float] = dataclasses.field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("x,weight\n")
        for x, w in zip(self.distribution.support, self.distribution.weights):
            buf.write(f"{x!r},{w!r}\n")
        return buf.getvalue()

    def summary(self) -> Dict:
        return {
            "q": self.entropy.q.q if self.entropy else None,
            "S_q": self.entropy.value if self.entropy else None,
            "multipliers": self.multipliers,
            "kkt_residual": self.kkt_residual,
            "iterations": self.iterations,
            "moments": self.moments,
        }


def escort_moment(p: DiscreteDistribution, q: QLike, power: int) -> float:
    """``sum_i escort(p, q)_i x_i^power`` for ``power`` in {1, 2}."""
    if power not in (1, 2):
        raise DomainError(f"power must be 1 or 2, got {power}")
    esc = escort(p, q)
    return math.fsum(esc.p * p.x ** power)


def feasible_range(problem: MaxentProblem) -> Dict[ConstraintKind, Tuple[float, float]]:
    """Open interval of attainable targets for each constraint.

    Raises:
        Infeasible: if some target lies outside its interval.
    """
    x = np.sort(problem.x)
    lo, hi = float(x[0]), float(x[-1])
    ranges: Dict[ConstraintKind, Tuple[float, float]] = {}
    mean = None
    for kind in (ConstraintKind.ORDINARY_MEAN, ConstraintKind.ESCORT_MEAN):
        target = problem.target(kind)
        if target is not None:
            ranges[kind] = (lo, hi)
            mean = target
            if not lo < target < hi:
                raise Infeasible(f"{kind.value} target {target} outside ({lo}, {hi})")
    var = problem.target(ConstraintKind.ESCORT_VARIANCE)
    if var is not None:
        below = x[x <= mean]
        above = x[x >= mean]
        v_min = (mean - below[-1]) * (above[0] - mean)
        v_max = (mean - lo) * (hi - mean)
        ranges[ConstraintKind.ESCORT_VARIANCE] = (float(v_min), float(v_max))
        if not v_min < var < v_max:
            raise Infeasible(f"escort-variance target {var} outside ({v_min}, {v_max})")
    return ranges


class _EscortObjective:
    """``phi``, its derivative and the inverse derivative for index ``s = 1/q``."""

    def __init__(self, q: QParam):
        self.deformed = q.deformed
        self.s = 1.0 / q.q

    def phi(self, P: np.ndarray) -> np.ndarray:
        if not self.deformed:
            out = np.zeros_like(P)
            pos = P > 0
            out[pos] = -P[pos] * np.log(P[pos])
            return out
        return (np.power(P, self.s) - P) / (1 - self.s)

    def dphi(self, P: np.ndarray) -> np.ndarray:
        if not self.deformed:
            return -np.log(P) - 1
        return (self.s * np.power(P, self.s - 1) - 1) / (1 - self.s)

    def weights_from(self, u: np.ndarray) -> Optional[np.ndarray]:
        """Maximizer of ``phi(P) - u P`` per atom; None outside the dual domain."""
        if not self.deformed:
            return np.exp(-1 - u)
        s = self.s
        bracket = 1 + (1 - s) * u
        if s < 1:
            if np.any(bracket <= 0):
                return None
            return np.power(bracket / s, 1 / (s - 1))
        # s > 1: atoms with a nonpositive bracket sit at the cutoff
        P = np.zeros_like(u)
        pos = bracket > 0
        P[pos] = np.power(bracket[pos] / s, 1 / (s - 1))
        return P

    def curvature(self, P: np.ndarray) -> np.ndarray:
        """``-dP/du`` at the maximizer, zero on cut atoms."""
        if not self.deformed:
            return P
        out = np.zeros_like(P)
        pos = P > 0
        out[pos] = np.power(P[pos], 2 - self.s) / self.s
        return out


def _design(problem: MaxentProblem) -> Tuple[np.ndarray, np.ndarray]:
    """Rows ``[1, a_1, ..., a_k]`` per atom and the right-hand side."""
    x = problem.x
    mean = problem.target(ConstraintKind.ESCORT_MEAN)
    cols, rhs = [np.ones_like(x)], [1.0]
    for c in problem.constraints:
        if c.kind == ConstraintKind.ESCORT_VARIANCE:
            cols.append((x - mean) ** 2)
        else:
            cols.append(x.copy())
        rhs.append(c.target)
    return np.column_stack(cols), np.asarray(rhs)


def _dual(obj: _EscortObjective, A: np.ndarray, b: np.ndarray,
          theta: np.ndarray) -> Tuple[float, Optional[np.ndarray]]:
    u = A @ theta
    P = obj.weights_from(u)
    if P is None or not np.all(np.isfinite(P)):
        return math.inf, None
    return float(np.sum(obj.phi(P) - u * P) + theta @ b), P


def _stationarity(obj: _EscortObjective, A: np.ndarray, P: np.ndarray) -> float:
    """Part of ``grad phi`` on the support not explained by the constraints."""
    pos = P > 0
    grad = obj.dphi(P[pos])
    basis = A[pos]
    coef, *_ = np.linalg.lstsq(basis, grad, rcond=None)
    scale = max(1.0, float(np.max(np.abs(grad))))
    return float(np.max(np.abs(grad - basis @ coef))) / scale


def solve_maxent(problem: MaxentProblem, tol: Optional[float] = None,
                 max_iter: Optional[int] = None) -> MaxentSolution:
    """Maximize ``S_q`` over distributions on the support meeting the constraints.

    Args:
        problem: Support, index and constraints.
        tol: Bound on the KKT residual (constraint violation and projected
            stationarity).
        max_iter: Newton iteration budget.

    Raises:
        Infeasible: when a target is outside the attainable range.
        DomainError: for ``tol <= 0`` or ``max_iter < 1``.
        ConvergenceFailure: when the budget runs out above ``tol``.
    """
    tol = setting(tol, "maxent", "tol")
    max_iter = setting(max_iter, "maxent", "max_iter")
    if not tol > 0:
        raise DomainError(f"tol must be positive, got {tol}")
    if max_iter < 1:
        raise DomainError(f"max_iter must be positive, got {max_iter}")
    feasible_range(problem)

    obj = _EscortObjective(problem.q)
    A, b = _design(problem)
    n = len(problem.support)
    theta = np.zeros(A.shape[1])
    theta[0] = float(obj.dphi(np.array([1.0 / n]))[0])
    value, P = _dual(obj, A, b, theta)

    iterations = 0
    grad = b - A.T @ P
    while np.max(np.abs(grad)) > tol * 0.1:
        if iterations >= max_iter:
            break
        iterations += 1
        w = obj.curvature(P)
        hess = (A * w[:, None]).T @ A
        step, *_ = np.linalg.lstsq(hess, -grad, rcond=None)
        slope = float(grad @ step)
        if slope >= 0:
            # singular curvature, fall back to steepest descent
            step, slope = -grad, -float(grad @ grad)
        t = 1.0
        while True:
            cand = theta + t * step
            cand_value, cand_P = _dual(obj, A, b, cand)
            if cand_value <= value + 1e-4 * t * slope:
                break
            t /= 2
            if t < 1e-14:
                LOG.warning(f"maxent line search stalled at iteration {iterations}")
                raise ConvergenceFailure("maxent line search stalled",
                                         residual=float(np.max(np.abs(grad))),
                                         iterations=iterations)
        theta, value, P = cand, cand_value, cand_P
        grad = b - A.T @ P
        LOG.debug(f"maxent iter {iterations}: step {t:.3g}, "
                  f"violation {np.max(np.abs(grad)):.3e}")

    residual = max(float(np.max(np.abs(grad))), _stationarity(obj, A, P))
    if residual > tol:
        raise ConvergenceFailure(f"maxent residual {residual:.3e} above {tol} "
                                 f"after {iterations} iterations",
                                 residual=residual, iterations=iterations)

    if obj.deformed:
        raw = np.power(P, obj.s)
    else:
        raw = P
    dist = DiscreteDistribution.from_weights(raw, problem.support, normalize=True)
    moments = {}
    for c in problem.constraints:
        if c.kind == ConstraintKind.ORDINARY_MEAN:
            moments[c.kind.value] = math.fsum(dist.p * dist.x)
        elif c.kind == ConstraintKind.ESCORT_MEAN:
            moments[c.kind.value] = escort_moment(dist, problem.q, 1)
        else:
            mean = problem.target(ConstraintKind.ESCORT_MEAN)
            esc = escort(dist, problem.q)
            moments[c.kind.value] = math.fsum(esc.p * (dist.x - mean) ** 2)
    LOG.info(f"maxent converged in {iterations} iterations, residual {residual:.3e}")
    return MaxentSolution(dist, theta.tolist(), residual, iterations,
                          tsallis_entropy(dist, problem.q), moments)
