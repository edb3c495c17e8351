"""Exception types shared across the package."""


class VemError(Exception):
    """Base class for all package errors."""


class MeshError(VemError):
    """Invalid mesh input: duplicate vertices, non-manifold edges, bad cycles."""


class DegenerateElementError(MeshError):
    """Element fails star-shapedness or has degenerate sub-triangles."""


class UnsupportedDegreeError(VemError):
    """Quadrature degree outside the supported range."""


class SingularSystemError(VemError):
    """Dense solve hit a matrix that is singular to working precision."""


class IndefiniteSystemError(VemError):
    """Conjugate gradients met a direction of nonpositive curvature."""


class ConvergenceError(VemError):
    """Iterative solver exhausted its iteration budget."""


class ConfigError(VemError):
    """Malformed study configuration."""
