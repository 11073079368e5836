"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """Non-finite or otherwise malformed input."""


class ConstraintViolationError(ValueError):
    """Series violates the linear constraints (zero mean, no first modes)."""


class DegenerateInputError(ValueError):
    """Degenerate data: vanishing L1 norm, too few sign changes, 0/0 ratio."""


class SingularLengthError(ValueError):
    """Nodal interval of length pi: the generic closed forms do not apply
    (the Fredholm compatibility relation replaces them)."""


class EpsilonTooLargeError(ValueError):
    """Radial perturbation too large for the area constraint to be solvable."""
