"""Exception types shared across the package."""


class NetqaError(Exception):
    """Base class for all errors raised by this package."""


class GeometryError(NetqaError):
    """Invalid geometric value (non-finite coordinate, degenerate shape)."""


class ParseError(NetqaError):
    """Input file could not be parsed."""

    def __init__(self, path, message, line=None, column=None):
        self.path = str(path)
        self.line = line
        self.column = column
        where = self.path
        if line is not None:
            where += f":{line}"
            if column is not None:
                where += f":{column}"
        super().__init__(f"{where}: {message}")


class UnsupportedGeometryError(ParseError):
    """Feature collection contains geometry types other than line strings."""

    def __init__(self, path, feature_ids):
        self.feature_ids = list(feature_ids)
        shown = ", ".join(str(f) for f in self.feature_ids[:10])
        if len(self.feature_ids) > 10:
            shown += ", ..."
        super().__init__(path, f"unsupported geometry type on feature(s): {shown}")


class CrsError(NetqaError):
    """Coordinates look geographic (degrees); projected meters are required."""


class ConfigError(NetqaError):
    """Invalid or incomplete configuration."""


class GridMismatchError(NetqaError):
    """Two per-cell surfaces were built on different grids."""


class WeightsError(NetqaError):
    """Spatial weights cannot be built as requested."""


class ZeroVarianceError(NetqaError):
    """Autocorrelation statistic undefined for a constant-valued input."""


class PipelineError(NetqaError):
    """A pipeline stage failed."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {cause}")
