"""Centralized numerical tolerances.

Every module takes its thresholds from one ``EpsilonConfig`` so tests can
tighten or loosen them uniformly.  Defaults follow the contracts of the
individual operations; the two tangency thresholds differ by design
(boundary-element surfaces are evaluated through quadrature and need a much
coarser tangency test than closed-form parametric geometry).
"""

from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class EpsilonConfig:
    # geometric degeneracy
    degenerate: float = 1e-12         # projection center coincides with a point
    unit_norm: float = 1e-12          # |norm - 1| allowed for unit vectors
    arc_ortho: float = 1e-10          # |endpoint . pole| allowed for arcs
    arc_coplanar: float = 1e-10       # |pole_a x pole_b| below which arcs are coplanar
    on_arc: float = 1e-9              # point-to-arc distance treated as "on the arc"
    snap: float = 1e-9                # arrangement vertices closer than this merge
    # intersection records
    tangent_parametric: float = 1e-12  # |d . n| tangency threshold, mesh + parametric
    tangent_bem: float = 1e-2          # |d . n| tangency threshold, BEM patches
    edge_graze: float = 1e-10          # barycentric distance to a triangle edge
    dedup: float = 1e-9                # roots closer than this merge (world units)
    residual: float = 1e-10            # accepted |f(u,v) - O - tR| after refinement
    # arrangement bookkeeping
    area_closure: float = 1e-8         # sum of face areas vs 4*pi
    # engine
    jitter_scale: float = 1e-7         # query jitter, in units of scene diagonal
    integer_snap: float = 1e-9         # |w - round(w)| for watertight scenes

    def with_(self, **kwargs) -> "EpsilonConfig":
        """Copy with selected fields replaced."""
        return replace(self, **kwargs)


DEFAULT_EPS = EpsilonConfig()
