"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Bad or inconsistent user-supplied configuration."""


class ExprSyntaxError(ConfigError):
    """Malformed expression source; carries the offending position."""

    def __init__(self, message, position):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class MeshTopologyError(RuntimeError):
    """Mesh connectivity violates an assumption (disconnected, bad incidence)."""


class NotPositiveDefiniteError(RuntimeError):
    """Symmetric factorization met a non-positive pivot (penalty likely too small)."""


class RankDeficiencyError(RuntimeError):
    """A per-cell constraint matrix is numerically rank deficient."""
