class TaxoscopeError(Exception):
    """Base class for every domain error raised by this package.

    The CLI maps these to exit status 1; the HTTP service maps them to
    4xx responses with a machine-readable ``code``.
    """

    code = "error"
