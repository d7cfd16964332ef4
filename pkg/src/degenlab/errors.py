"""Exception types shared across the package."""


class DegenlabError(Exception):
    """Base class for all package-specific failures."""


class SingularWeightError(DegenlabError, ValueError):
    """Weight evaluation requested at a point where it diverges."""


class DivergentIntegralError(DegenlabError, ValueError):
    """A weight integral that the parameters make infinite."""


class UnknownSolutionError(DegenlabError, LookupError):
    """Catalog lookup with a name that is not registered."""


class SingularFaceError(DegenlabError, ValueError):
    """A face factor touches y = 0 where the inverse weight diverges."""


class WrongClassError(DegenlabError, ValueError):
    """Input does not belong to the symmetry/regularization class required."""


class SolverError(DegenlabError, RuntimeError):
    """Linear solve failed to reach the requested tolerance."""


class ConfigError(DegenlabError, ValueError):
    """Malformed scenario configuration text."""
