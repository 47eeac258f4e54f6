# ABOUTME: Error hierarchy shared by every scene_mmkg module
# ABOUTME: Each class carries the exit code the batch CLI reports for it


class SceneMMKGError(Exception):
    """Base class for all scene_mmkg failures"""

    exit_code = 1


class ContractError(SceneMMKGError):
    """A precondition of an operation was violated"""

    exit_code = 2


class ConfigurationError(SceneMMKGError):
    """Invalid or missing configuration / input file"""

    exit_code = 2


class TemplateError(ContractError):
    pass


class ProviderError(SceneMMKGError):
    exit_code = 3


class ProviderTransportError(ProviderError):
    """Endpoint unreachable or failing after all retries"""


class ProviderConfigError(ProviderError):
    """Provider misconfiguration, including fixture misses"""


class GraphError(SceneMMKGError):
    exit_code = 4


class GraphFrozenError(GraphError):
    pass


class IntegrityError(GraphError):
    pass


class CorruptionError(GraphError):
    """A persisted graph file does not match its manifest checksum"""

    def __init__(self, filename: str, message: str = ""):
        self.filename = filename
        super().__init__(message or f"Checksum mismatch for {filename}")


class SchemaVersionError(GraphError):
    pass


class EntityNotFoundError(GraphError, LookupError):
    pass


class RetrievalError(GraphError):
    pass


class NumericError(SceneMMKGError):
    pass
