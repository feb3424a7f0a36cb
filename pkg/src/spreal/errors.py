"""Exception hierarchy shared by every module.

Each class carries a ``status`` used by the CLI to pick an exit code.
"""


class SpRealError(Exception):
    status = "hypothesis_failed"


class HypothesisFailed(SpRealError):
    pass


class NotUnimodular(HypothesisFailed):
    pass


class NotPrimitive(HypothesisFailed):
    pass


class NotInvertibleMod2(HypothesisFailed):
    pass


class NotInvertible(HypothesisFailed):
    pass


class NotSymplectic(HypothesisFailed):
    pass


class NumericalSingularity(HypothesisFailed):
    pass


class NotLinearBlock(HypothesisFailed):
    pass


class NotCocycle(HypothesisFailed):
    pass


class NotRealPoint(HypothesisFailed):
    pass


class RankInstability(HypothesisFailed):
    pass


class BadBlockForm(HypothesisFailed):
    pass


class NotInParabolic(HypothesisFailed):
    pass


class GeneratorUncertainty(HypothesisFailed):
    pass


class NotFound(SpRealError):
    status = "not_found"


class BudgetExceeded(SpRealError):
    status = "budget_exceeded"
