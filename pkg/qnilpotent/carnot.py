"""Sub-Riemannian geometry of the Heisenberg group.

Carnot dilations, the Koranyi gauge, Carnot-Caratheodory distances by
geodesic shooting, ball growth of finitely generated groups, and the
Pansu difference quotient.

Geodesics from the origin are horizontal lifts of circular arcs. In
exponential coordinates the ``z`` coordinate of a horizontal curve is the
signed area between its planar projection and the chord, so a geodesic to
``(x, y, z)`` is the arc over the chord of length ``r = |(x, y)|`` that
encloses area ``z``.
"""
import dataclasses
import io
import math
from typing import Callable, Dict, Hashable, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np
from joblib import Parallel, delayed
from scipy.optimize import brentq
from sklearn.linear_model import LinearRegression

from qnilpotent.config import setting
from qnilpotent.exceptions import ConvergenceFailure, DomainError, FitRejected, ResourceLimit
from qnilpotent.heisenberg import HeisenbergPoint, group_law, polarized_law

try:
    from ovos_utils.log import LOG
except ImportError:
    from logging import getLogger
    LOG = getLogger("qnilpotent")

#: Coefficient of ``z^2`` in the Koranyi gauge.
KORANYI_CONSTANT = 16.0
#: Homogeneous dimension of the Heisenberg group.
HOMOGENEOUS_DIMENSION = 4

PointMap = Callable[[HeisenbergPoint], HeisenbergPoint]


def dilate(g: HeisenbergPoint, lam: float) -> HeisenbergPoint:
    """Carnot dilation ``(x, y, z) -> (lam x, lam y, lam^2 z)``.

    Raises:
        DomainError: for ``lam <= 0``.
    """
    if not lam > 0:
        raise DomainError(f"dilation factor must be positive, got {lam}")
    return HeisenbergPoint(lam * g.x, lam * g.y, lam * lam * g.z)


def koranyi_norm(g: HeisenbergPoint) -> float:
    """``((x^2 + y^2)^2 + 16 z^2)^(1/4)``, homogeneous of degree 1."""
    rr = g.x * g.x + g.y * g.y
    return (rr * rr + KORANYI_CONSTANT * g.z * g.z) ** 0.25


# ── Carnot-Caratheodory distance ──────────────────────────────────────────

@dataclasses.dataclass
class GeodesicResult:
    """A length-minimizing horizontal path and how well it hits the target.

    Args:
        length: Carnot-Caratheodory length of the path.
        samples: Points along the path, first is the start, last the end.
        solver_residual: Max-coordinate distance between the last sample
            and the requested endpoint.
    """
    length: float
    samples: List[HeisenbergPoint]
    solver_residual: float


def _chord_area_ratio(h: float) -> float:
    """Area over squared chord for an arc of half-angle ``h`` in ``[0, pi)``."""
    u = 2 * h
    if u < 1e-2:
        num = u ** 3 / 6 - u ** 5 / 120 + u ** 7 / 5040
    else:
        num = u - math.sin(u)
    s = math.sin(h)
    return num / (8 * s * s) if h else 0.0


def _chord_area_ratio_near_circle(w: float) -> float:
    """Same ratio written in ``w = pi - h``, accurate as the arc closes up."""
    s = math.sin(w)
    return (2 * math.pi - 2 * w + math.sin(2 * w)) / (8 * s * s)


def _solve_half_angle(m: float, max_iter: int) -> Tuple[float, float]:
    """Solve for the arc enclosing ``m`` times the squared chord.

    The root is refined to relative machine precision, not to an absolute
    step, since it shrinks with the chord.

    Returns:
        ``(h, sin h)`` with ``h`` the half of the swept angle.
    """
    xtol = 1e-300
    try:
        if m <= math.pi / 8:
            h = brentq(lambda t: _chord_area_ratio(t) - m, 0.0, math.pi / 2,
                       xtol=xtol, maxiter=max_iter)
            return h, math.sin(h)
        w_lo = min(0.5 * math.sqrt(math.pi / (4 * m)), math.pi / 2)
        w = brentq(lambda t: _chord_area_ratio_near_circle(t) - m, w_lo, math.pi / 2,
                   xtol=xtol, maxiter=max_iter)
    except RuntimeError as e:
        raise ConvergenceFailure(f"geodesic shooting did not converge: {e}",
                                 iterations=max_iter) from e
    return math.pi - w, math.sin(w)


def _geodesic_from_origin(target: HeisenbergPoint,
                          max_iter: int) -> Tuple[float, float, float]:
    """Initial direction, curvature and length of the geodesic to ``target``."""
    r = math.hypot(target.x, target.y)
    z = target.z
    beta = math.atan2(target.y, target.x) if r > 0 else 0.0
    if z == 0:
        return beta, 0.0, r
    sigma = 1.0 if z > 0 else -1.0
    m = abs(z) / (r * r) if r * r > 0 else math.inf
    if not math.isfinite(m):
        # full circle enclosing |z|
        length = 2 * math.sqrt(math.pi * abs(z))
        theta = 2 * math.pi * sigma
        return beta - theta / 2, theta / length, length
    h, sin_h = _solve_half_angle(m, max_iter)
    length = r * h / sin_h if h else r
    theta = 2 * h * sigma
    return beta - theta / 2, theta / length, length


def _sample_geodesic(alpha: float, kappa: float, length: float,
                     n: int) -> List[HeisenbergPoint]:
    s = np.linspace(0.0, length, max(n, 2))
    if kappa == 0:
        xs, ys, zs = s * math.cos(alpha), s * math.sin(alpha), np.zeros_like(s)
    else:
        phase = alpha + kappa * s
        xs = (np.sin(phase) - math.sin(alpha)) / kappa
        ys = (math.cos(alpha) - np.cos(phase)) / kappa
        ks = kappa * s
        zs = (ks - np.sin(ks)) / (2 * kappa * kappa)
    return [HeisenbergPoint(float(a), float(b), float(c)) for a, b, c in zip(xs, ys, zs)]


def cc_distance(g: HeisenbergPoint, h: HeisenbergPoint, tol: float = 1e-10,
                max_iter: Optional[int] = None,
                n_samples: Optional[int] = None) -> GeodesicResult:
    """Carnot-Caratheodory distance from ``g`` to ``h``.

    Left-translates to the origin, shoots the circular-arc geodesic family
    for the arc angle, then samples the path back in the original frame.

    Raises:
        DomainError: for ``tol <= 0``.
        ConvergenceFailure: if the endpoint residual stays above ``tol``.
    """
    if not tol > 0:
        raise DomainError("tol must be positive")
    max_iter = setting(max_iter, "ccdist", "max_iter")
    n_samples = setting(n_samples, "ccdist", "samples")
    if max_iter < 1 or n_samples < 2:
        raise DomainError("max_iter must be positive and n_samples at least 2")

    target = group_law(g.inverse(), h)
    alpha, kappa, length = _geodesic_from_origin(target, max_iter)
    local = _sample_geodesic(alpha, kappa, length, n_samples)
    samples = [group_law(g, p) for p in local]

    end_local, end = local[-1], samples[-1]
    residual = max(abs(end_local.x - target.x), abs(end_local.y - target.y),
                   abs(end_local.z - target.z),
                   abs(end.x - h.x), abs(end.y - h.y), abs(end.z - h.z))
    scale = max(1.0, abs(h.x), abs(h.y), abs(h.z), abs(g.x), abs(g.y), abs(g.z))
    if residual > tol * scale:
        LOG.warning(f"geodesic endpoint residual {residual} above tolerance {tol}")
        raise ConvergenceFailure(f"geodesic endpoint missed by {residual}",
                                 residual=residual, iterations=max_iter)
    return GeodesicResult(length, samples, residual)


def cc_distance_many(pairs: Sequence[Tuple[HeisenbergPoint, HeisenbergPoint]],
                     tol: float = 1e-10, n_jobs: int = 1) -> List[GeodesicResult]:
    """Solve independent distance problems, optionally on a thread pool."""
    if n_jobs == 1:
        return [cc_distance(g, h, tol) for g, h in pairs]
    return Parallel(n_jobs=n_jobs, prefer="threads")(
        delayed(cc_distance)(g, h, tol) for g, h in pairs)


def metric_equivalence(points: Iterable[HeisenbergPoint],
                       tol: float = 1e-10) -> Tuple[float, float]:
    """Measured ``(c1, c2)`` with ``c1 |g|_K <= d(e, g) <= c2 |g|_K``."""
    e = HeisenbergPoint.origin()
    ratios = [cc_distance(e, g, tol).length / koranyi_norm(g)
              for g in points if koranyi_norm(g) > 0]
    if not ratios:
        raise DomainError("need at least one point away from the origin")
    return min(ratios), max(ratios)


def koranyi_volume_exponent(radii: Sequence[float], samples: Optional[int] = None,
                            seed: int = 0) -> Tuple[float, List[float]]:
    """Monte-Carlo volumes of Koranyi balls and their log-log scaling exponent.

    One uniform sample of the box enclosing the largest ball is shared by all
    radii.

    Returns:
        ``(exponent, volumes)``.
    """
    radii = np.asarray(sorted(radii), dtype=float)
    if len(radii) < 2 or radii[0] <= 0:
        raise DomainError("need at least two positive radii")
    samples = setting(samples, "volume", "samples")
    if samples < 1:
        raise DomainError(f"samples must be positive, got {samples}")
    big = radii[-1]
    rng = np.random.default_rng(seed)
    xy = rng.uniform(-big, big, size=(samples, 2))
    zmax = big * big / math.sqrt(KORANYI_CONSTANT)
    z = rng.uniform(-zmax, zmax, size=samples)
    rr = (xy * xy).sum(axis=1)
    norms = (rr * rr + KORANYI_CONSTANT * z * z) ** 0.25
    box = (2 * big) ** 2 * 2 * zmax
    counts = np.array([(norms <= r).sum() for r in radii], dtype=float)
    if np.any(counts == 0):
        raise DomainError("smallest ball received no samples; raise samples or radii")
    volumes = box * counts / samples
    reg = LinearRegression().fit(np.log(radii).reshape(-1, 1), np.log(volumes))
    return float(reg.coef_[0]), volumes.tolist()


# ── group growth ──────────────────────────────────────────────────────────

@dataclasses.dataclass(frozen=True)
class CayleyGroup:
    """A finitely generated group given by right multiplication by generators.

    Args:
        name: Label used in reports and on the CLI.
        identity: Hashable identity element.
        generators: Symmetric generating set (closed under inverses).
        step: ``step(g, s)`` returns ``g * s``.
    """
    name: str
    identity: Hashable
    generators: Tuple[Hashable, ...]
    step: Callable[[Hashable, Hashable], Hashable]

    def neighbors(self, g: Hashable) -> List[Hashable]:
        return [self.step(g, s) for s in self.generators]


def _free_step(word: Tuple[int, ...], letter: int) -> Tuple[int, ...]:
    if word and word[-1] == -letter:
        return word[:-1]
    return word + (letter,)


GROUPS: Dict[str, CayleyGroup] = {
    # matrix coordinates keep integer points integral
    "heisenberg": CayleyGroup("heisenberg", (0, 0, 0),
                              ((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0)),
                              polarized_law),
    "z2": CayleyGroup("z2", (0, 0),
                      ((1, 0), (-1, 0), (0, 1), (0, -1)),
                      lambda g, s: (g[0] + s[0], g[1] + s[1])),
    "free2": CayleyGroup("free2", (), (1, -1, 2, -2), _free_step),
}


def get_group(name: str) -> CayleyGroup:
    if name not in GROUPS:
        raise DomainError(f"unknown group {name!r}, expected one of {sorted(GROUPS)}")
    return GROUPS[name]


@dataclasses.dataclass
class GrowthReport:
    """Ball sizes of a Cayley graph and, once fitted, their power-law exponent."""
    group: str
    records: List[Tuple[int, int]]
    fitted_exponent: Optional[float] = None
    fit_residual: Optional[float] = None
    window: Optional[Tuple[int, int]] = None

    @property
    def sizes(self) -> List[int]:
        return [size for _, size in self.records]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("radius,ball_size\n")
        for radius, size in self.records:
            buf.write(f"{radius},{size}\n")
        return buf.getvalue()

    def summary(self) -> Dict:
        return {
            "group": self.group,
            "r_max": self.records[-1][0],
            "exponent": self.fitted_exponent,
            "residual": self.fit_residual,
            "window": list(self.window) if self.window else None,
        }


def _expand(group: CayleyGroup, chunk: Sequence[Hashable], visited: Set[Hashable]) -> Set[Hashable]:
    found: Set[Hashable] = set()
    for g in chunk:
        for nb in group.neighbors(g):
            if nb not in visited:
                found.add(nb)
    return found


def discrete_ball_sizes(r_max: int, group: str = "heisenberg",
                        element_budget: Optional[int] = None,
                        n_jobs: Optional[int] = None) -> GrowthReport:
    """Breadth-first enumeration of word-metric balls ``B(0) .. B(r_max)``.

    The visited set only grows between radii, so the counts do not depend
    on how a frontier is split across workers.

    Raises:
        DomainError: for negative ``r_max`` or an unknown group.
        ResourceLimit: when more than ``element_budget`` elements are visited.
    """
    if r_max < 0:
        raise DomainError("r_max must be nonnegative")
    budget = setting(element_budget, "growth", "element_budget")
    n_jobs = setting(n_jobs, "growth", "n_jobs")
    if budget < 1 or n_jobs < 1:
        raise DomainError("element_budget and n_jobs must be positive")
    cayley = get_group(group)

    visited: Set[Hashable] = {cayley.identity}
    frontier: List[Hashable] = [cayley.identity]
    records = [(0, 1)]
    for radius in range(1, r_max + 1):
        if n_jobs == 1 or len(frontier) < 1024:
            new = _expand(cayley, frontier, visited)
        else:
            size = math.ceil(len(frontier) / n_jobs)
            chunks = [frontier[i:i + size] for i in range(0, len(frontier), size)]
            parts = Parallel(n_jobs=n_jobs, prefer="threads")(
                delayed(_expand)(cayley, chunk, visited) for chunk in chunks)
            new = set().union(*parts)
        visited |= new
        if len(visited) > budget:
            LOG.warning(f"{group} ball of radius {radius} exceeds budget of {budget} elements")
            raise ResourceLimit(f"ball of radius {radius} in {group} has more than "
                                f"{budget} elements", budget=budget)
        frontier = list(new)
        records.append((radius, len(visited)))
        LOG.debug(f"{group}: |B({radius})| = {len(visited)}")
    return GrowthReport(group, records)


def growth_exponent(report: GrowthReport, min_radius: Optional[int] = None,
                    max_residual: Optional[float] = None) -> GrowthReport:
    """Fit ``log |B(r)|`` against ``log r`` over the tail of the records.

    The window starts at ``max(min_radius, r_max // 2)``; the residual is the
    root mean square of the fit in log space.

    Raises:
        DomainError: with fewer than 5 records in the window.
        FitRejected: when the residual exceeds ``max_residual``, i.e. the
            growth is not a power law. The fitted report is attached.
    """
    min_radius = setting(min_radius, "growth", "min_radius")
    max_residual = setting(max_residual, "growth", "max_residual")
    if max_residual < 0:
        raise DomainError(f"max_residual must be nonnegative, got {max_residual}")
    r_max = report.records[-1][0]
    start = max(min_radius, r_max // 2)
    tail = [(r, n) for r, n in report.records if r >= start]
    if len(tail) < 5:
        raise DomainError(f"need 5 records with radius >= {start}, have {len(tail)}")

    log_r = np.log([r for r, _ in tail]).reshape(-1, 1)
    log_n = np.log([n for _, n in tail])
    reg = LinearRegression().fit(log_r, log_n)
    resid = log_n - reg.predict(log_r)
    fitted = dataclasses.replace(report,
                                 fitted_exponent=float(reg.coef_[0]),
                                 fit_residual=float(np.sqrt(np.mean(resid ** 2))),
                                 window=(start, r_max))
    if fitted.fit_residual > max_residual:
        LOG.warning(f"{report.group}: log-log residual {fitted.fit_residual:.3g} "
                    f"above {max_residual}, growth is not polynomial")
        raise FitRejected(f"growth of {report.group} is not polynomial "
                          f"(residual {fitted.fit_residual:.3g})", report=fitted)
    LOG.info(f"{report.group}: growth exponent {fitted.fitted_exponent:.4f} "
             f"on radii {start}..{r_max}")
    return fitted


# ── Pansu difference quotients ────────────────────────────────────────────

def pansu_quotient(f: PointMap, g: HeisenbergPoint, h: HeisenbergPoint,
                   t: float) -> HeisenbergPoint:
    """``dilate(f(g)^-1 f(g dilate(h, t)), 1 / t)``.

    Raises:
        DomainError: for ``t <= 0``.
    """
    if not t > 0:
        raise DomainError(f"t must be positive, got {t}")
    moved = f(group_law(g, dilate(h, t)))
    return dilate(group_law(f(g).inverse(), moved), 1.0 / t)


@dataclasses.dataclass
class PansuSchedule:
    """Quotients at ``t0, t0/2, t0/4, ...``.

    ``differences[k]`` is the max-coordinate gap between quotients ``k`` and
    ``k + 1``; ``ratios[k]`` compares consecutive differences (nan when a
    difference vanishes). ``richardson`` is ``2 Q(t/2) - Q(t)`` on the last
    pair, exact for errors linear in ``t``.
    """
    ts: List[float]
    quotients: List[HeisenbergPoint]
    differences: List[float]
    ratios: List[float]
    richardson: HeisenbergPoint


def pansu_schedule(f: PointMap, g: HeisenbergPoint, h: HeisenbergPoint,
                   t0: float = 1.0, halvings: int = 10) -> PansuSchedule:
    if halvings < 1:
        raise DomainError("need at least one halving")
    ts = [t0 / 2 ** k for k in range(halvings + 1)]
    quotients = [pansu_quotient(f, g, h, t) for t in ts]
    diffs = [max(abs(a.x - b.x), abs(a.y - b.y), abs(a.z - b.z))
             for a, b in zip(quotients, quotients[1:])]
    ratios = [b / a if a > 0 else float("nan") for a, b in zip(diffs, diffs[1:])]
    prev, last = quotients[-2], quotients[-1]
    richardson = HeisenbergPoint(2 * last.x - prev.x, 2 * last.y - prev.y,
                                 2 * last.z - prev.z)
    return PansuSchedule(ts, quotients, diffs, ratios, richardson)


def left_translation(g0: HeisenbergPoint) -> PointMap:
    return lambda p: group_law(g0, p)


def dilation(mu: float) -> PointMap:
    return lambda p: dilate(p, mu)


def shear(p: HeisenbergPoint) -> HeisenbergPoint:
    """``(x, y, z) -> (x + y^2, y, z)``, smooth but not a group morphism."""
    return HeisenbergPoint(p.x + p.y * p.y, p.y, p.z)
