"""Exception hierarchy shared by every stage of the pipeline."""


class PatentAnalogError(Exception):
    """Base class; ``status`` is the HTTP code the API layer maps it to."""

    status = 422


class MalformedInput(PatentAnalogError):
    status = 400


# ingest
class UnsupportedFormat(PatentAnalogError):
    pass


class EncodingError(PatentAnalogError):
    pass


# clp
class LanguageMismatch(PatentAnalogError):
    def __init__(self, doc_ids):
        self.doc_ids = list(doc_ids)
        super().__init__(f"documents are not Ukrainian: {', '.join(self.doc_ids)}")


# trainer
class EmptyVocabulary(PatentAnalogError):
    pass


class DomainError(PatentAnalogError):
    pass


class DimensionMismatch(PatentAnalogError):
    pass


# vectors
class UnknownTerm(PatentAnalogError):
    status = 404

    def __init__(self, term):
        self.term = term
        super().__init__(f"term not in vocabulary: {term!r}")


class ZeroVector(PatentAnalogError):
    def __init__(self, term):
        self.term = term
        super().__init__(f"zero vector for term {term!r}")


class DegenerateCenter(PatentAnalogError):
    pass


class DegenerateMean(PatentAnalogError):
    pass


class MalformedModelFile(PatentAnalogError):
    pass


class ModelNotInitialized(PatentAnalogError):
    pass


# patent_search
class EmptyTermArray(PatentAnalogError):
    pass


class EmptyStore(PatentAnalogError):
    pass


class MissingField(PatentAnalogError):
    def __init__(self, names):
        self.names = sorted(set(names))
        super().__init__(f"template fields without a value: {', '.join(self.names)}")


class NotFound(PatentAnalogError):
    status = 404


class StorageCorruption(PatentAnalogError):
    status = 500


# coordinator
class UnknownServiceId(PatentAnalogError):
    status = 404


class UnknownFunction(PatentAnalogError):
    status = 404


class EmptyServiceSet(PatentAnalogError):
    pass


class NotExecutable(PatentAnalogError):
    status = 409

    def __init__(self, function_id, missing):
        self.function_id = function_id
        self.missing = list(missing)
        super().__init__(f"{function_id} is not executable; missing services: {', '.join(self.missing)}")


class StageError(PatentAnalogError):
    """A failure inside a pipeline stage, tagged with the service that ran it."""

    status = 500

    def __init__(self, service, cause):
        self.service = service
        self.cause = cause
        super().__init__(f"{service}: {type(cause).__name__}: {cause}")


class NoPipeline(PatentAnalogError):
    """A user-defined function is executable in principle but has no pipeline bound."""
