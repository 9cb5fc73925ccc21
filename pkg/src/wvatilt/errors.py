"""Exception types shared across the package."""


class AngleDomainError(ValueError):
    """Incidence angle outside [0, pi/2) or an evanescent refraction radicand."""


class DegeneratePostSelection(ArithmeticError):
    """Post-selection probability below the floor; the pointer mean is a 0/0.

    Raised instead of returning a value at (or numerically indistinguishable
    from) the exact dark port, where the surviving intensity vanishes and the
    position expectation value is undefined.
    """


class SingularSelectionError(ValueError):
    """Weak value requested at epsilon = 0, where cot(epsilon) diverges."""


class GridTooCoarseError(ValueError):
    """Sampling grid does not cover the state or underresolves the boost phase."""


class PointNotFoundError(LookupError):
    """Fewer phase-matching points exist below pi/2 than were requested."""


class RankDeficientFitError(ValueError):
    """Free-parameter mask exceeds what the measurement set can constrain."""


class ConfigError(ValueError):
    """Configuration text failed to parse or violated a parameter invariant."""
