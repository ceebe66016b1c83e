from typing import Optional, Sequence, Tuple


class LoopGaugeError(Exception):
    """Base error. `exit_code` is what the CLI returns when it escapes."""

    exit_code = 3

    def __init__(self, message: str, **details):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_dict(self) -> dict:
        return {"error": type(self).__name__, "message": self.message, **self.details}


class KernelError(LoopGaugeError):
    """Dimension errors, non-convergence, branch cuts, singular inputs."""


class ConvergenceError(KernelError):
    pass


class InvalidStateError(LoopGaugeError):
    """Unphysical matrices, bad weights, unknown catalog entries."""

    exit_code = 2


class GroupElementError(LoopGaugeError):
    """Matrix is not in SL(2,C) or SO+(1,3) at tolerance."""


class LinkError(LoopGaugeError):
    """A two-qubit link of a loop cannot carry a parallel transporter."""

    def __init__(self, message: str, link: Optional[Sequence[int]] = None, **details):
        self.link: Optional[Tuple[int, ...]] = tuple(link) if link is not None else None
        super().__init__(message, link=list(self.link) if self.link else None, **details)


class RankDeficientLink(LinkError):
    pass


class ProductStateLink(RankDeficientLink):
    pass


class DefectiveLink(LinkError):
    """The eigenproblem route cannot diagonalize the link; use the sqrt route."""


class AnnihilatingStep(LinkError):
    pass
