"""Exception hierarchy for relcheck."""


class RelcheckError(Exception):
    """Base class for all errors raised by relcheck."""


class ModelError(RelcheckError):
    """A model violates a structural requirement."""


class ValidationError(ModelError):
    """An MDP failed validation; carries the list of violations."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


class UnknownState(ModelError):
    pass


class UnknownAction(ModelError):
    pass


class IncompatibleScheduler(ModelError):
    """Scheduler refers to states/actions not enabled in the MDP."""


class LambdaOutOfRange(RelcheckError):
    """Convex combination weight outside [0, 1]."""


class PropertySyntaxError(RelcheckError):
    """Property text does not conform to the grammar."""

    def __init__(self, message, position=None):
        self.position = position
        super().__init__(message if position is None else f"{message} (at {position})")


class AlternationNotSupported(PropertySyntaxError):
    """Mixed forall/exists quantifier prefixes are rejected."""


class UnboundSchedulerVariable(PropertySyntaxError):
    pass


class ModelSyntaxError(RelcheckError):
    """Model file is not valid input."""


class UnknownLabel(RelcheckError):
    """An initial-state label has no mapping in the model."""


class UnknownProposition(RelcheckError):
    """An atomic proposition does not occur in the model's labelling."""


class MixedTemporalOperators(RelcheckError):
    """Query mixes eventually- and repeatedly-operators after normalization."""


class MultiPredicate(RelcheckError):
    """A single-predicate routine received a conjunction; use the
    multi-objective solver instead."""


class NonzeroRewardInEC(RelcheckError):
    """Reward structure pays inside an end component; expected total reward
    would diverge."""


class RewardInEC(NonzeroRewardInEC):
    pass


class DivergentReward(RelcheckError):
    """A rewarded state is visited infinitely often with positive probability."""


class InconsistentMecAnnotation(RelcheckError):
    """A MEC of a goal unfolding spans two distinct visited-target sets."""


class TooManySchedulers(RelcheckError):
    """Brute-force enumeration would exceed the configured cap."""


class NoWitnessAvailable(RelcheckError):
    """Witness synthesis is not possible (e.g. approximate bounds do not
    bracket the target value, or an MD transfer does not exist)."""


class MalformedClause(RelcheckError):
    """A 3SAT clause does not have exactly three literals."""


class UnknownCaseStudy(RelcheckError):
    pass
