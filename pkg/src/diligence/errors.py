"""Exception hierarchy shared across the pipeline modules."""


class DiligenceError(Exception):
    """Base class for all pipeline errors."""


class GraphDefinitionError(DiligenceError):
    """A workflow graph file or object is structurally unusable."""


class TransportError(DiligenceError):
    """A remote call failed at the transport level; retryable for fetches."""


class NotFoundTransportError(TransportError):
    """The remote endpoint answered, but the requested resource is unknown."""


class MalformedPayloadError(DiligenceError):
    """A remote payload or document violates its declared shape."""


class CorruptPdfError(MalformedPayloadError):
    """PDF bytes cannot be parsed into at least one page."""


class CompanyNotFoundError(DiligenceError):
    """Trigger referenced a company_id absent from the company database."""


class CompanyDbError(DiligenceError):
    """Company database file is missing, unparseable, or violates the schema."""


class AnchorFactError(DiligenceError):
    """A company profile claims a baseline fact not present verbatim in the record."""


class MissingArtifactError(DiligenceError):
    """An operation requires an upstream artifact that this run never produced."""


class SchemaRejectedError(DiligenceError):
    """Agent output failed role-schema validation, including the one re-ask."""


class CitationError(DiligenceError):
    """A claim's citation is absent or does not resolve to retrieved material."""


class RoutingError(DiligenceError):
    """A router emitted a branch label that is not declared on its edges."""


class DeliveryError(DiligenceError):
    """A delivery sink could not hand off the rendered report."""
