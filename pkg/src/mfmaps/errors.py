"""Exception hierarchy.

Node-wise failures carry the offending node index in ``node`` so callers can
report exactly where a sampled object left a domain.
"""


class MfmapsError(Exception):
    """Base class for all library errors."""

    def __init__(self, message, node=None):
        if node is not None:
            message = f"{message} (node {node})"
        super().__init__(message)
        self.node = node


class ValidationError(MfmapsError, ValueError):
    """A value violates a type invariant (membership, tangency, shapes)."""


class OutsideOmega(MfmapsError):
    """A tangent vector lies outside the local-addition domain."""


class OutsidePrime(MfmapsError):
    """A point pair lies outside the image of (pi, Sigma)."""


class OutsideChart(MfmapsError):
    """A point lies outside the domain of a coordinate chart."""


class ChartDomainViolation(OutsideChart):
    """A frame window maps into points outside its target chart."""


class ChartTooLarge(MfmapsError, ValueError):
    """Requested chart radius exceeds the injectivity cap of the instance."""


class Unsupported(MfmapsError, NotImplementedError):
    """The construction is not available for this manifold instance."""


class GridMismatch(MfmapsError, ValueError):
    """Grids are not node-compatible for the requested operation."""


class NotNodeAligned(GridMismatch):
    """A grid map sends some node off the target lattice."""


class NotCompactlySupported(MfmapsError, ValueError):
    """Function does not vanish outside its declared support box."""


class OverlapConflict(MfmapsError, ValueError):
    """Glued pieces disagree on a shared node."""


class CoverageGap(MfmapsError, ValueError):
    """Some target node is covered by no piece or window."""


class BadNesting(MfmapsError, ValueError):
    """Boxes are not nested as required by the cut-off construction."""


class DomainViolation(MfmapsError, ValueError):
    """A smooth map was evaluated outside its domain."""


class IncompatibleFrame(MfmapsError, ValueError):
    """Local representatives disagree on overlaps beyond the frame tolerance."""


class NotProduct(MfmapsError, TypeError):
    """The target manifold is not a product instance."""


class BadIndex(MfmapsError, IndexError):
    """Node index out of range."""


class EvalFailure(MfmapsError):
    """A function evaluation failed inside a numerical procedure."""

    def __init__(self, message, node=None, step=None):
        if step is not None:
            message = f"{message} at step {step!r}"
        super().__init__(message, node=node)
        self.step = step


class ConfigError(MfmapsError, ValueError):
    """Invalid runner configuration."""
