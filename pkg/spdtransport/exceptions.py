"""
Exceptions raised by the spdtransport library and its commands.
"""


class SpdTransportError(Exception):
    """
    Base class for every error raised by this app.
    """
    exit_code = 1


class InvalidInput(SpdTransportError):
    exit_code = 3


class NotPositiveDefinite(InvalidInput):
    """
    A matrix failed the eigenvalue test for positive definiteness.
    """

    def __init__(self, message, min_eigenvalue=None):
        super(NotPositiveDefinite, self).__init__(message)
        self.min_eigenvalue = min_eigenvalue


class InvalidParameter(InvalidInput):
    pass


class EmptyInput(InvalidInput):
    pass


class DegenerateLabels(InvalidInput):
    pass


class DimensionMismatch(SpdTransportError):
    exit_code = 4


class BasePointMismatch(DimensionMismatch):
    """
    Two tangent vectors, or a tangent vector and a point, do not share
    the same base point.
    """


class DidNotConverge(SpdTransportError):
    """
    The Riemannian mean iteration ran out of iterations.

    The last iterate and its gradient norm are kept on ``result`` so
    callers can decide whether to carry on with it.
    """
    exit_code = 5

    def __init__(self, message, result=None):
        super(DidNotConverge, self).__init__(message)
        self.result = result


class ArtifactIOError(SpdTransportError):
    exit_code = 6

    def __init__(self, message, path=None):
        if path is not None:
            message = '{}: {}'.format(path, message)
        super(ArtifactIOError, self).__init__(message)
        self.path = path


class MissingLabels(SpdTransportError):
    exit_code = 7

    def __init__(self, message, domain_id=None):
        super(MissingLabels, self).__init__(message)
        self.domain_id = domain_id


class VerificationFailed(SpdTransportError):
    exit_code = 8

    def __init__(self, message, failed=()):
        super(VerificationFailed, self).__init__(message)
        self.failed = list(failed)
