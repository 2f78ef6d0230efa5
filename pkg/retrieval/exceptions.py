class RetrievalError(Exception):
    """Base class for run-file, qrels and index errors."""


class TrecFormatError(RetrievalError):
    def __init__(self, line_no: int, message: str):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}")


class DuplicateEntryError(RetrievalError):
    pass


class RankingInvariantError(RetrievalError, ValueError):
    pass


class IndexBuildError(RetrievalError):
    pass


class IndexFormatError(RetrievalError):
    pass


class UnknownDocumentError(RetrievalError, KeyError):
    def __init__(self, doc_id: str):
        self.doc_id = doc_id
        super().__init__(doc_id)

    def __str__(self):
        return f"unknown document id: {self.doc_id}"
