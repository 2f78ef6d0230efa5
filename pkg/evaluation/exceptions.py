class EvaluationError(ValueError):
    pass
