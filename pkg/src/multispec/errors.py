"""Exception hierarchy shared by all modules.

Exit-code mapping used by the CLI:
  InvalidArgumentError -> 1, CertificateError -> 2, TooLargeError -> 3.
"""


class MultispecError(Exception):
    """Base class for all library errors."""


class InvalidArgumentError(MultispecError, ValueError):
    """A caller-supplied value violates a documented precondition."""


class TooLargeError(MultispecError):
    """A size guard (vertex cap, eigensolver cap, brute-force cap) was hit."""


class TilingMismatchError(InvalidArgumentError):
    """The patch depth l does not tile the truncation depth (L % (l+1) != l)."""


class IncompleteSubtreeError(InvalidArgumentError):
    """Requested a depth-j subtree below a vertex of depth < j."""


class DegenerateDisorderError(InvalidArgumentError):
    """Sampled coupling values collide where generic (distinct) disorder is required."""


class UnsupportedError(MultispecError):
    """Operation requires a finite group but got a truncated one."""


class CertificateError(MultispecError):
    """A verification step failed: a residual, orthogonality or count
    assertion did not hold at its tolerance."""
