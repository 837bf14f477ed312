"""Exception types shared by every module."""


class MoaError(Exception):
    pass


class DomainError(MoaError, ValueError):
    """An argument outside an operator's domain (bad shape, bad permutation)."""


class MoaIndexError(MoaError, IndexError):
    """An index component out of bounds; the message names the axis."""


class RangeError(MoaError, IndexError):
    """A count or offset outside the permitted range."""


class NotReducible(MoaError):
    """The expression has no affine loop-nest form."""
