"""Exception types shared across the package.

Errors that signal a resolvable numerical degeneracy (a query point sitting
exactly on a boundary, a collapsed arrangement vertex, ...) derive from
``RetryableDegeneracy`` so the engine can jitter the query and rebuild.
"""


class GwnError(Exception):
    """Base class for all library errors."""


class RetryableDegeneracy(GwnError):
    """Degenerate configuration that a small query jitter can resolve."""


class DegenerateProjection(RetryableDegeneracy):
    """A point to be projected coincides with the projection center."""


class OverlappingArcs(RetryableDegeneracy):
    """Two great-circle arcs are coplanar and share more than a point."""


class NumericallyUnstableVertex(RetryableDegeneracy):
    """Arrangement vertices collapsed beyond what snapping can repair."""


class PointLocationFailure(RetryableDegeneracy):
    """Point location could not produce a reliable answer."""


class OnBoundary(GwnError):
    """Query direction lies on an arrangement arc."""


class InteriorPointFailure(GwnError):
    """No verified interior point found after halvings and rejection sampling."""


class InconsistentIncrements(RetryableDegeneracy):
    """Two arcs shared by the same face pair disagree on the crossing sign."""


class CycleInconsistency(RetryableDegeneracy):
    """BFS closed a cycle in the region graph with conflicting values."""


class SeedExhausted(GwnError):
    """Every seed ray through the chosen region was tangent to the surface."""


class NonManifoldEdge(GwnError):
    """A mesh edge is incident to more than two triangles."""


class OpenChain(GwnError):
    """Boundary edges of a mesh do not chain into closed loops."""


class NonOrientable(GwnError):
    """Orientation propagation reached a triangle with conflicting winding."""


class DegenerateNormal(GwnError):
    """Surface partials are parallel; the normal is undefined."""


class SingularPoint(GwnError):
    """Fundamental solution evaluated at coincident points."""


class SingularSystem(GwnError):
    """The dense boundary-element system is rank deficient."""


class OutsideDomain(GwnError):
    """Evaluation point lies outside the parametric domain."""


class OnSurface(GwnError):
    """Query point lies on the surface; the winding number is undefined there."""


class GridMismatch(GwnError):
    """Two grids to be combined have different shapes or extents."""


class SceneError(GwnError):
    """Scene description is malformed."""
