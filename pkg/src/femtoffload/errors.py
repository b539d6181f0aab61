"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Raised for malformed or out-of-domain inputs."""


class NoChannelError(ValueError):
    """A positive rate was requested over a channel with no usable eigenmode."""


class InfeasibleSplitError(ValueError):
    """The offload branch alone cannot meet the latency budget for this split."""


class InfeasibleProblem(Exception):
    """No data split satisfies the latency budget.

    ``l_required`` is the minimum affordable latency, i.e. the smallest
    budget for which the problem becomes feasible.
    """

    def __init__(self, l_required, message=None):
        self.l_required = l_required
        super().__init__(
            message or f"latency budget infeasible; minimum affordable latency is {l_required:.6g} s"
        )
