"""qnilpotent: q-deformed arithmetic, Tsallis entropy and Heisenberg group geometry."""

from qnilpotent.qalgebra import QParam, q_add, q_exp, q_log, q_negate  # noqa: F401
from qnilpotent.entropy import DiscreteDistribution, tsallis_entropy, escort  # noqa: F401
from qnilpotent.heisenberg import HeisenbergPoint, UpperUnitriangular, group_law  # noqa: F401
from qnilpotent.carnot import cc_distance, discrete_ball_sizes, growth_exponent  # noqa: F401
from qnilpotent.maxent import MaxentProblem, solve_maxent  # noqa: F401
