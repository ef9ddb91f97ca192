"""Exception types shared across matchlab."""


class MatchlabError(Exception):
    """Base class for all matchlab errors."""


class DomainError(MatchlabError, ValueError):
    """An input violates a documented precondition."""


class GuardError(MatchlabError, RuntimeError):
    """A desk-scale resource guard was exceeded.

    Guards can be raised globally by setting ``MATCHLAB_GUARD_OVERRIDE=1``.
    """
