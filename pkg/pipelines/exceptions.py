class PipelineConfigurationError(Exception):
    """The pipeline cannot run as composed (no source, reranker without texts, ...)."""


class RunConfigError(Exception):
    def __init__(self, message, errors=None):
        self.errors = errors or {}
        super().__init__(message)


class StageError(Exception):
    def __init__(self, stage_name: str, query_id: str, cause: Exception):
        self.stage_name = stage_name
        self.query_id = query_id
        self.cause = cause
        super().__init__(f"stage {stage_name} failed for query {query_id}: {cause}")
