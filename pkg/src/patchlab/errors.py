"""Exception types shared across patchlab."""


class PatchlabError(Exception):
    """Base class for every error raised by this package."""


class InvalidArgument(PatchlabError, ValueError):
    pass


class UnsupportedImageSize(PatchlabError, ValueError):
    def __init__(self, dims):
        self.dims = tuple(dims)
        super().__init__(f"unsupported image size {self.dims[0]}x{self.dims[1]}")


class InvalidAnnotation(PatchlabError, ValueError):
    pass


class ParseError(PatchlabError, ValueError):
    """Malformed input file. ``location`` points at the offending element."""

    def __init__(self, message, location=None):
        self.location = location
        if location:
            message = f"{location}: {message}"
        super().__init__(message)


class SchemaError(ParseError):
    pass


class IntegrityError(PatchlabError):
    """Cross-reference failure; ``ids`` holds the offending identifiers."""

    def __init__(self, message, ids=()):
        self.ids = list(ids)
        if self.ids:
            shown = ", ".join(str(i) for i in self.ids[:10])
            more = f" (+{len(self.ids) - 10} more)" if len(self.ids) > 10 else ""
            message = f"{message}: {shown}{more}"
        super().__init__(message)


class EmptySelection(PatchlabError, ValueError):
    pass


class RankError(PatchlabError, ValueError):
    def __init__(self, message, columns=()):
        self.columns = list(columns)
        if self.columns:
            message = f"{message}: {', '.join(self.columns)}"
        super().__init__(message)


class FoldRankError(RankError):
    def __init__(self, fold, cause):
        self.fold = fold
        super().__init__(f"fold {fold}: {cause}", getattr(cause, "columns", ()))


class InsufficientData(PatchlabError, ValueError):
    pass


class InvalidComparison(PatchlabError, ValueError):
    pass


class DependencyError(PatchlabError):
    """An upstream output required by a step is missing."""
