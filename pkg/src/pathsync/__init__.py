"""Time-optimal coordination of robots on fixed paths.

The package assembles a time-discretized mixed-integer linear program over
per-robot speed profiles and pairwise priorities, solves it to proven
optimality with a built-in branch-and-bound engine (or exports it for an
external solver), and verifies the resulting trajectories geometrically.
"""

from .geometry import (
    AbstractPath,
    CollisionPolygon,
    CollisionSamples,
    ConflictZone,
    GeometryError,
    PathGeometry,
    RobotSpec,
    arc_pose,
    bounding_polygon,
    compute_collision_set,
    conflict_zones,
    decompose,
    split_components,
)

__version__ = "0.1.0"
