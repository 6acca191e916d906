class YamabeLabError(Exception):
    pass


class DomainError(YamabeLabError, ValueError):
    """An argument lies outside the domain where the formula makes sense."""


class SingularityError(DomainError):
    """The 3D right-hand side was evaluated at rho <= 0."""


class PoleObstructionError(DomainError):
    """A smooth pole is impossible for the requested fiber."""


class StencilRangeError(YamabeLabError, IndexError):
    pass


class InsufficientDataError(YamabeLabError, ValueError):
    pass


class StiffnessError(YamabeLabError, RuntimeError):
    """Step size fell below ``h_min``; ``last_state`` is the last accepted state."""

    def __init__(self, message, last_state=None, trajectory=None):
        super().__init__(message)
        self.last_state = last_state
        self.trajectory = trajectory
