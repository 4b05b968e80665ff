"""Exception hierarchy shared by the library and the CLI."""


class GroupFBError(Exception):
    """Base class for all library errors."""


class StructureError(GroupFBError, ValueError):
    """Malformed or inconsistent algebraic input (bad table, bad action, group mismatch)."""


class SingularPolyphaseError(GroupFBError):
    """The polyphase matrix is not left-invertible at some character.

    Raised when the lower frame constant does not clear the tolerance,
    i.e. the samples are insufficient to recover the input.
    """

    def __init__(self, gamma, lambda_min: float, threshold: float):
        self.gamma = gamma
        self.lambda_min = float(lambda_min)
        self.threshold = float(threshold)
        super().__init__(
            f"samples insufficient: lambda_min[H*H] = {self.lambda_min:.3e} "
            f"<= {self.threshold:.3e} at gamma = {gamma}"
        )


class DegenerateGeneratorError(GroupFBError):
    """The orbit of the generator is not a Riesz sequence."""
