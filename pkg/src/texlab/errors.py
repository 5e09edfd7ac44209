"""Exception hierarchy shared across the package."""


class TexlabError(Exception):
    """Base class for all texlab errors."""


class DimensionError(TexlabError):
    """Dimension mismatch or unsupported dimension."""


class InvalidStateError(TexlabError):
    """Vector or matrix fails the state invariants."""


class InvalidChannelError(TexlabError):
    """Kraus set fails completeness or block-structure invariants."""


class UnsupportedVariantError(TexlabError):
    """Free-set variant not supported by the requested operation."""


class OptimizationError(TexlabError):
    """Optimizer received invalid bounds or failed structurally."""


class NoCandidatesError(TexlabError):
    """Basis reconstruction found no consistent candidate."""


class DegenerateContinuumError(NoCandidatesError):
    """Basis reconstruction constraints admit a continuum of solutions."""
