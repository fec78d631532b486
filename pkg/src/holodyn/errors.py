"""Exception and warning types shared across the package."""


class HolodynError(Exception):
    """Base class for all errors raised by holodyn."""


class DegenerateBranch(HolodynError):
    """A disk pulled back through z^d + c contains the critical value."""


class AmbiguousConvergence(HolodynError):
    """A near-periodic orbit refined to a cycle with |multiplier| close to 1."""

    def __init__(self, message, record=None):
        super().__init__(message)
        self.record = record


class NoConvergence(HolodynError):
    pass


class DerivativeSingular(HolodynError):
    pass


class BranchPointHit(HolodynError):
    """A backward orbit landed exactly on the critical value."""

    def __init__(self, message, step):
        super().__init__(message)
        self.step = step


class MinusInfinityInWindow(HolodynError):
    pass


class OrbitHitsCritical(HolodynError):
    def __init__(self, message, index):
        super().__init__(message)
        self.index = index


class CertificationLost(HolodynError):
    pass


class HypothesisFails(HolodynError):
    """The expansion hypothesis of a density report does not hold."""

    def __init__(self, message, average_rate=None, required=None):
        super().__init__(message)
        self.average_rate = average_rate
        self.required = required


class PreconditionUnmet(HolodynError):
    pass


class CoefficientBlowup(HolodynError):
    pass


class InvalidConfig(HolodynError):
    """Configuration rejected; ``problems`` maps field name -> message."""

    def __init__(self, problems):
        self.problems = dict(problems)
        lines = [f"{k}: {v}" for k, v in sorted(self.problems.items())]
        super().__init__("invalid config:\n  " + "\n  ".join(lines))


class NonemptyRequired(HolodynError):
    pass


class HypothesisViolated(UserWarning):
    """Pliss hypotheses fail; the returned index set carries no count guarantee."""
