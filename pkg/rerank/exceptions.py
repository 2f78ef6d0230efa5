class BackendError(Exception):
    """Anything that goes wrong talking to a chat backend."""


class MissingCredentialsError(BackendError):
    pass


class EndpointError(BackendError):
    """Non-retryable HTTP status from the endpoint."""

    def __init__(self, status: int, body_excerpt: str = ''):
        self.status = status
        self.body_excerpt = body_excerpt
        super().__init__(f"endpoint returned HTTP {status}: {body_excerpt}")


class RetryableEndpointError(BackendError):
    def __init__(self, message: str, status: int = None):
        self.status = status
        super().__init__(message)


class RetriesExhaustedError(BackendError):
    def __init__(self, attempts: int, last_error: Exception):
        self.attempts = attempts
        self.last_error = last_error
        super().__init__(f"gave up after {attempts} attempts: {last_error}")


class ProtocolError(BackendError):
    pass


class UnrecognizedPromptError(BackendError):
    pass


class PromptError(ValueError):
    pass


class UnparseableResponseError(ValueError):
    def __init__(self, response: str):
        self.response = response
        super().__init__(f"no usable answer in response: {response[:80]!r}")


class RerankError(Exception):
    """A backend failure that aborts reranking of one query."""

    def __init__(self, query_id: str, where: str, cause: Exception):
        self.query_id = query_id
        self.where = where
        self.cause = cause
        super().__init__(f"query {query_id}, {where}: {cause}")
