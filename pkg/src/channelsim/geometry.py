"""Barrier slab with a channel opening, and the three wall models.

The slab occupies x in [x_in, x_in + ell]; material is the slab minus the
channel opening [y_center - a/2, y_center + a/2]. Grid points with
|y - y_center| >= a/2 count as material, so for grid-aligned geometry the
wavefunction is pinned to zero exactly at y = y_center +/- a/2 and the
discrete channel reproduces the width-a Dirichlet well.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError
from .grid import Field, Grid

HARD = "hard"
STEP = "step"
SMOOTH = "smooth"

# Default step/smooth barrier height as a multiple of the nominal packet
# energy. Must be large enough that wall penetration (~1/sqrt(2 V0)) does not
# widen the effective channel measurably; see BarrierModel.default_v0.
V0_ENERGY_FACTOR = 800.0


@dataclass(frozen=True)
class ChannelGeometry:
    """x_in: beam-side face position; ell: slab thickness along x;
    a: channel width (a = 0 closes the channel into a solid wall);
    y_center: channel centerline."""

    x_in: float
    ell: float
    a: float
    y_center: float = 0.0

    def __post_init__(self):
        if self.ell <= 0:
            raise InvalidArgumentError(f"channel length must be positive, got ell={self.ell}")
        if self.a < 0:
            raise InvalidArgumentError(f"channel width must be >= 0, got a={self.a}")

    @property
    def x_out(self) -> float:
        return self.x_in + self.ell

    @property
    def y_lo(self) -> float:
        return self.y_center - self.a / 2

    @property
    def y_hi(self) -> float:
        return self.y_center + self.a / 2


@dataclass(frozen=True)
class BarrierModel:
    """kind: 'hard' (Dirichlet mask), 'step' (V = v0 on material), or
    'smooth' (v0 * smoothstep over width w centered on the material
    boundary)."""

    kind: str
    v0: float | None = None
    w: float | None = None

    def __post_init__(self):
        if self.kind not in (HARD, STEP, SMOOTH):
            raise InvalidArgumentError(f"unknown barrier model kind {self.kind!r}; expected hard|step|smooth")
        if self.kind in (STEP, SMOOTH):
            if self.v0 is None or self.v0 <= 0:
                raise InvalidArgumentError(f"{self.kind} barrier needs v0 > 0, got {self.v0}")
        if self.kind == SMOOTH:
            if self.w is None or self.w <= 0:
                raise InvalidArgumentError(f"smooth barrier needs edge width w > 0, got {self.w}")

    @staticmethod
    def default_v0(k0: float) -> float:
        return V0_ENERGY_FACTOR * 0.5 * k0 * k0

    def validate_resolution(self, grid: Grid):
        if self.kind == SMOOTH and self.w < 2 * max(grid.dx, grid.dy):
            raise InvalidArgumentError(
                f"smooth edge width w={self.w} under-resolved: need w >= 2*max(dx,dy)={2 * max(grid.dx, grid.dy)}"
            )


def _validate_inside_grid(grid: Grid, geom: ChannelGeometry):
    xs = grid.x()
    if geom.x_in < xs[0] + 2 * grid.dx or geom.x_out > xs[-1] - 2 * grid.dx:
        raise InvalidArgumentError(
            f"slab [{geom.x_in}, {geom.x_out}] must sit at least two spacings inside the grid x extent"
        )
    # An opening that swallows the whole y extent leaves no material (no
    # barrier at all) and is allowed; a partial opening must have both walls
    # strictly inside the grid.
    if geom.a > 0 and _material_rows(grid, geom).any():
        if geom.y_lo <= grid.y()[0] or geom.y_hi >= grid.y()[-1]:
            raise InvalidArgumentError(
                f"channel opening [{geom.y_lo}, {geom.y_hi}] must lie strictly inside the grid y extent"
            )


def _slab_columns(grid: Grid, geom: ChannelGeometry) -> np.ndarray:
    x = grid.x()
    return (x >= geom.x_in) & (x <= geom.x_out)


def _material_rows(grid: Grid, geom: ChannelGeometry) -> np.ndarray:
    if geom.a == 0:
        return np.ones(grid.ny, dtype=bool)
    y = grid.y()
    return np.abs(y - geom.y_center) >= geom.a / 2


def wall_mask(grid: Grid, geom: ChannelGeometry) -> np.ndarray:
    """Boolean (ny, nx): True exactly on material points (slab minus opening)."""
    _validate_inside_grid(grid, geom)
    return _material_rows(grid, geom)[:, None] & _slab_columns(grid, geom)[None, :]


def _smoothstep(t: np.ndarray) -> np.ndarray:
    t = np.clip(t, 0.0, 1.0)
    return t * t * (3.0 - 2.0 * t)


def _material_signed_distance(grid: Grid, geom: ChannelGeometry) -> np.ndarray:
    """Signed distance into barrier material (> 0 inside), on grid points.

    Material is a union of up to two axis-aligned rectangles (below and above
    the opening); the union distance is the max of the per-rectangle signed
    distances, exact here because the rectangles are disjoint.
    """
    x = grid.x()[None, :]
    y = grid.y()[:, None]
    yw = grid.y_walls
    rects = []
    if geom.a == 0:
        rects.append((yw[0], yw[1]))
    else:
        if geom.y_lo > yw[0]:
            rects.append((yw[0], geom.y_lo))
        if geom.y_hi < yw[1]:
            rects.append((geom.y_hi, yw[1]))
    d = np.full((grid.ny, grid.nx), -np.inf)
    for y1, y2 in rects:
        qx = np.maximum(geom.x_in - x, x - geom.x_out)
        qy = np.maximum(y1 - y, y - y2)
        outside = np.hypot(np.maximum(qx, 0.0), np.maximum(qy, 0.0))
        inside = np.minimum(np.maximum(qx, qy), 0.0)
        d = np.maximum(d, -(outside + inside))
    return d


def build_potential(grid: Grid, geom: ChannelGeometry, model: BarrierModel) -> Field:
    """Real-valued potential field for the model.

    hard  -> identically zero (the wall lives in wall_mask instead);
    step  -> v0 on material points;
    smooth-> v0 * smoothstep ramp of width w centered on the material boundary.
    """
    _validate_inside_grid(grid, geom)
    model.validate_resolution(grid)
    if model.kind == HARD:
        v = np.zeros((grid.ny, grid.nx))
    elif model.kind == STEP:
        v = np.where(wall_mask(grid, geom), float(model.v0), 0.0)
    else:
        d = _material_signed_distance(grid, geom)
        v = float(model.v0) * _smoothstep(d / float(model.w) + 0.5)
    return Field(grid, v.astype(np.complex128))


@dataclass(frozen=True)
class FaceSegments:
    """Grid points of the two barrier faces normal to the beam, outside the
    channel opening, with the Eq.-of-motion sign convention: entry face
    (first encountered by the beam) carries sign -1, exit face +1.

    i_entry/i_exit are the first/last material column indices; rows holds the
    material row indices shared by both faces.
    """

    i_entry: int
    i_exit: int
    rows: np.ndarray

    @property
    def entry(self) -> list[tuple[tuple[int, int], int]]:
        return [((self.i_entry, int(j)), -1) for j in self.rows]

    @property
    def exit(self) -> list[tuple[tuple[int, int], int]]:
        return [((self.i_exit, int(j)), +1) for j in self.rows]


def face_segments(grid: Grid, geom: ChannelGeometry) -> FaceSegments:
    """Faces of the barrier for the boundary-force line integral.

    The faces belong to the first and last material columns; the one-sided
    derivative there is taken from the vacuum side, so both columns need two
    vacuum columns beside them (guaranteed by geometry validation).
    """
    _validate_inside_grid(grid, geom)
    cols = np.flatnonzero(_slab_columns(grid, geom))
    rows = np.flatnonzero(_material_rows(grid, geom))
    if cols.size == 0 or rows.size == 0:
        return FaceSegments(i_entry=-1, i_exit=-1, rows=np.empty(0, dtype=np.int64))
    return FaceSegments(i_entry=int(cols[0]), i_exit=int(cols[-1]), rows=rows)
