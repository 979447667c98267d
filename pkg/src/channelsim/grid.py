"""Uniform 2D grid, complex fields over it, and the elementary integrals.

Units are hbar = m = 1 throughout. Fields are stored as complex128 arrays of
shape (ny, nx); axis 1 is the beam direction x, axis 0 the transverse
direction y. The outer box is a hard box: the propagator treats the first
point beyond each edge as zero, so the effective Dirichlet walls sit one
spacing outside the outermost grid points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateStateError,
    GridMismatchError,
    InvalidArgumentError,
)

# Fields with quadrature norm below this are rejected, not silently normalized.
DEGENERATE_NORM2 = 1e-14

# Packet placement margins enforced by init_gaussian.
MIN_SIGMA_SPACINGS = 3.0
MIN_EDGE_SIGMAS = 4.0


@dataclass(frozen=True)
class Grid:
    """Uniform rectangular lattice: point(i, j) = (x0 + i*dx, y0 + j*dy)."""

    nx: int
    ny: int
    dx: float
    dy: float
    x0: float = 0.0
    y0: float = 0.0

    def __post_init__(self):
        if self.nx < 8 or self.ny < 8:
            raise InvalidArgumentError(f"grid counts must be >= 8, got {self.nx}x{self.ny}")
        if not (self.dx > 0 and self.dy > 0):
            raise InvalidArgumentError(f"grid spacings must be positive, got dx={self.dx}, dy={self.dy}")

    @property
    def lx(self) -> float:
        return self.nx * self.dx

    @property
    def ly(self) -> float:
        return self.ny * self.dy

    @property
    def cell_area(self) -> float:
        return self.dx * self.dy

    def x(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.nx)

    def y(self) -> np.ndarray:
        return self.y0 + self.dy * np.arange(self.ny)

    def point(self, i: int, j: int) -> tuple[float, float]:
        return (self.x0 + i * self.dx, self.y0 + j * self.dy)

    # Dirichlet walls of the hard outer box (one spacing beyond the points).
    @property
    def x_walls(self) -> tuple[float, float]:
        return (self.x0 - self.dx, self.x0 + self.nx * self.dx)

    @property
    def y_walls(self) -> tuple[float, float]:
        return (self.y0 - self.dy, self.y0 + self.ny * self.dy)

    def x_index(self, x: float) -> int:
        """Nearest column index for a physical x coordinate."""
        return int(round((x - self.x0) / self.dx))


def build_grid(nx: int, ny: int, dx: float, dy: float, x0: float = 0.0, y0: float = 0.0) -> Grid:
    if nx <= 0 or ny <= 0:
        raise InvalidArgumentError(f"grid counts must be positive, got {nx}, {ny}")
    return Grid(int(nx), int(ny), float(dx), float(dy), float(x0), float(y0))


@dataclass(frozen=True)
class PacketSpec:
    """Gaussian packet: centers, 1-sigma position widths, mean beam momentum.

    k0 is the free-space beam momentum p (hbar = 1); lambda = 2*pi/k0 and
    E = k0**2/2 where needed.
    """

    xc: float
    yc: float
    sx: float
    sy: float
    k0: float

    def __post_init__(self):
        if not (self.sx > 0 and self.sy > 0):
            raise InvalidArgumentError(f"packet widths must be positive, got sx={self.sx}, sy={self.sy}")


@dataclass(frozen=True)
class Field:
    """Complex amplitudes over a Grid. Treated as an immutable value: no
    public operation mutates `data` after construction."""

    grid: Grid
    data: np.ndarray  # complex128, shape (ny, nx)

    def __post_init__(self):
        if self.data.shape != (self.grid.ny, self.grid.nx):
            raise InvalidArgumentError(
                f"field shape {self.data.shape} does not match grid ({self.grid.ny}, {self.grid.nx})"
            )

    def copy(self) -> "Field":
        return Field(self.grid, self.data.copy())


def _check_same_grid(f: Field, g: Field):
    if f.grid != g.grid:
        raise GridMismatchError("fields live on different grids")


def inner_product(f: Field, g: Field) -> complex:
    """<f|g> = sum conj(f)*g * dx*dy (midpoint quadrature)."""
    _check_same_grid(f, g)
    return complex(np.vdot(f.data, g.data) * f.grid.cell_area)


def norm_squared(f: Field) -> float:
    return float(np.sum(np.abs(f.data) ** 2) * f.grid.cell_area)


def _normalization(f: Field) -> float:
    n2 = norm_squared(f)
    if n2 < DEGENERATE_NORM2:
        raise DegenerateStateError(f"field norm^2 = {n2:.3g} is below {DEGENERATE_NORM2:.0e}")
    return n2


def expectation_x(f: Field) -> float:
    """<x> over the full grid, normalized by the field's own norm."""
    n2 = _normalization(f)
    dens = np.abs(f.data) ** 2
    x = f.grid.x()
    return float(np.sum(dens.sum(axis=0) * x) * f.grid.cell_area / n2)


def expectation_p_beam(f: Field) -> float:
    """<p> along the beam axis: Im[sum conj(psi) d_x psi] * dx*dy / norm^2.

    d_x is the centered difference in the interior, one-sided at the x edges;
    valid when the packet is away from the outer x edges.
    """
    n2 = _normalization(f)
    dpsi = np.gradient(f.data, f.grid.dx, axis=1)
    val = np.sum(np.conj(f.data) * dpsi) * f.grid.cell_area
    return float(val.imag / n2)


def position_variance_x(f: Field) -> float:
    """Var(x), used by dispersion checks."""
    n2 = _normalization(f)
    dens = (np.abs(f.data) ** 2).sum(axis=0)
    x = f.grid.x()
    mean = np.sum(dens * x) * f.grid.cell_area / n2
    return float(np.sum(dens * (x - mean) ** 2) * f.grid.cell_area / n2)


def init_gaussian(grid: Grid, spec: PacketSpec) -> Field:
    """Normalized Gaussian packet exp(-(x-xc)^2/4sx^2 - (y-yc)^2/4sy^2) e^{i k0 x}.

    Rejects under-resolved packets (sigma < 3 spacings) and packets whose
    center sits closer than 4 sigma to the box walls.
    """
    if spec.sx < MIN_SIGMA_SPACINGS * grid.dx or spec.sy < MIN_SIGMA_SPACINGS * grid.dy:
        raise InvalidArgumentError(
            f"packet under-resolved: need sx >= {MIN_SIGMA_SPACINGS}*dx and "
            f"sy >= {MIN_SIGMA_SPACINGS}*dy, got sx/dx={spec.sx / grid.dx:.2f}, "
            f"sy/dy={spec.sy / grid.dy:.2f}"
        )
    xw = grid.x_walls
    yw = grid.y_walls
    margins = (
        (spec.xc - xw[0], spec.sx, "left x"),
        (xw[1] - spec.xc, spec.sx, "right x"),
        (spec.yc - yw[0], spec.sy, "bottom y"),
        (yw[1] - spec.yc, spec.sy, "top y"),
    )
    for margin, sigma, name in margins:
        if margin < MIN_EDGE_SIGMAS * sigma:
            raise InvalidArgumentError(
                f"packet too close to {name} edge: margin {margin:.3g} < "
                f"{MIN_EDGE_SIGMAS}*sigma = {MIN_EDGE_SIGMAS * sigma:.3g}"
            )
    x = grid.x()[None, :]
    y = grid.y()[:, None]
    envelope = np.exp(-((x - spec.xc) ** 2) / (4 * spec.sx**2) - ((y - spec.yc) ** 2) / (4 * spec.sy**2))
    data = envelope.astype(np.complex128) * np.exp(1j * spec.k0 * x)
    n2 = np.sum(np.abs(data) ** 2) * grid.cell_area
    data /= np.sqrt(n2)
    return Field(grid, data)
