"""Warning categories emitted by the numeric modules."""

__all__: tuple[str, ...] = (
    "VmmmapyWarning",
    "TruncationWarning",
    "AliasingWarning",
)


class VmmmapyWarning(UserWarning):
    pass


class TruncationWarning(VmmmapyWarning):
    """TruncationWarning is emitted when a truncated kernel leaves mass on its boundary cells"""


class AliasingWarning(VmmmapyWarning):
    """AliasingWarning is emitted when kernel mass extends beyond a Fourier grid"""
