"""Mapped 1-D grids, tensor-product 2-D grids and embedded 2-D domains.

A 1-D grid is a strictly monotone image of the uniform computational
coordinate xi in [0,1]; the mapping Jacobian x_xi is always reconstructed
from the nodes with fourth-order finite differences so that analytic and
tabulated mappings go through the same code path.  Non-rectangular 2-D
domains are handled by intersecting the domain with the background grid
lines: each maximal run of interior nodes becomes an independent segment
whose first and last cells end at the boundary intersection points.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateMappingError,
    InsufficientStencilError,
    InvalidMappingError,
    UnderResolvedSegmentError,
)


def jacobian_fd4(physical_nodes, delta_xi, periodic=False):
    """Fourth-order finite-difference Jacobian x_xi at every node.

    Interior nodes use the five-point central formula; for periodic
    mappings the node pattern repeats with period b - a, otherwise the four
    end nodes fall back to one-sided five-point formulas of the same order.
    """
    x = np.asarray(physical_nodes, dtype=float)
    n = x.size
    if n < 5:
        raise InsufficientStencilError(f"need at least 5 nodes, got {n}")
    h = float(delta_xi)
    jac = np.empty(n)
    if periodic:
        length = x[-1] - x[0]
        xe = np.concatenate([x[-3:-1] - length, x, x[1:3] + length])
        i = np.arange(n) + 2
        jac = (xe[i - 2] - 8 * xe[i - 1] + 8 * xe[i + 1] - xe[i + 2]) / (12 * h)
        return jac
    jac[2:-2] = (x[:-4] - 8 * x[1:-3] + 8 * x[3:-1] - x[4:]) / (12 * h)
    # One-sided / skewed five-point weights (same truncation order).
    onesided = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0
    skewed = np.array([-3.0, -10.0, 18.0, -6.0, 1.0]) / 12.0
    jac[0] = onesided @ x[:5] / h
    jac[1] = skewed @ x[:5] / h
    jac[-1] = -(onesided @ x[-5:][::-1]) / h
    jac[-2] = -(skewed @ x[-5:][::-1]) / h
    return jac


@dataclass(frozen=True)
class Grid1D:
    """Mapped 1-D mesh: uniform xi in [0,1] sent to physical nodes."""

    n_cells: int
    delta_xi: float
    physical_nodes: np.ndarray
    jacobian: np.ndarray
    bounds: tuple
    periodic: bool = False
    uniform: bool = False

    def __post_init__(self):
        self.physical_nodes.setflags(write=False)
        self.jacobian.setflags(write=False)

    @property
    def xi(self):
        return np.linspace(0.0, 1.0, self.n_cells + 1)

    @property
    def xi_x(self):
        """Inverse metric 1/J at the nodes."""
        return 1.0 / self.jacobian

    @property
    def cell_widths(self):
        return np.diff(self.physical_nodes)

    def to_csv(self, path):
        """Columns: i, xi, x, J."""
        xi = self.xi
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("i,xi,x,J\n")
            for i in range(self.n_cells + 1):
                fh.write(f"{i},{xi[i]:.16e},{self.physical_nodes[i]:.16e},"
                         f"{self.jacobian[i]:.16e}\n")


def build_grid_1d(mapping, n_cells, bounds, periodic=False,
                  analytic_jacobian=None):
    """Grid from an explicit node array or a scalar map xi -> x.

    The Jacobian comes from jacobian_fd4 even for analytic mappings (pass
    ``analytic_jacobian`` to override, mainly for testing).
    """
    n = int(n_cells)
    if n < 8:
        raise InsufficientStencilError(f"need at least 8 cells, got {n}")
    a, b = float(bounds[0]), float(bounds[1])
    xi = np.linspace(0.0, 1.0, n + 1)
    if callable(mapping):
        x = np.array([float(mapping(v)) for v in xi])
    elif mapping is None:
        x = a + (b - a) * xi
    else:
        x = np.asarray(mapping, dtype=float).copy()
        if x.size != n + 1:
            raise InvalidMappingError(
                f"node array has {x.size} entries, expected {n + 1}"
            )
    if not np.all(np.diff(x) > 0.0):
        raise InvalidMappingError("physical nodes must be strictly increasing")
    if abs(x[0] - a) > 1e-9 * max(1.0, abs(a)) or \
            abs(x[-1] - b) > 1e-9 * max(1.0, abs(b)):
        raise InvalidMappingError(
            f"mapping endpoints ({x[0]}, {x[-1]}) do not match bounds {bounds}"
        )
    x[0], x[-1] = a, b
    if analytic_jacobian is not None:
        jac = np.array([float(analytic_jacobian(v)) for v in xi])
    else:
        jac = jacobian_fd4(x, 1.0 / n, periodic=periodic)
    if np.any(jac <= 0.0):
        raise DegenerateMappingError("computed Jacobian is not strictly positive")
    widths = np.diff(x)
    uniform = bool(np.allclose(widths, widths[0], rtol=1e-9, atol=0.0))
    return Grid1D(n, 1.0 / n, x, jac, (a, b), periodic, uniform)


# -- mesh families ------------------------------------------------------------


def uniform_nodes(bounds, n_cells):
    return np.linspace(bounds[0], bounds[1], n_cells + 1)


def perturbed_nodes(bounds, n_cells, seed=0, amplitude=0.3):
    """Uniform nodes with seeded per-node jitter; endpoints stay put.

    Jitter is bounded by ``amplitude`` times the uniform spacing (< 0.5
    keeps the mesh monotone).
    """
    a, b = bounds
    n = int(n_cells)
    dx = (b - a) / n
    rng = np.random.default_rng(seed)
    x = uniform_nodes(bounds, n)
    x[1:-1] += amplitude * dx * rng.uniform(-1.0, 1.0, n - 1)
    return x


def perturbed_map(bounds, seed=0, amplitude=0.3, n_coarse=20):
    """Fixed random mapping: smooth interpolation of seeded coarse jitter.

    Nodes of a reference 20-cell mesh are jittered by ``amplitude`` of
    their spacing and connected by a periodic cubic spline of the
    displacement, so every resolution samples the same smooth nonuniform
    map and convergence under refinement is well defined.
    """
    from scipy.interpolate import CubicSpline

    a, b = bounds
    rng = np.random.default_rng(seed)
    xi_c = np.linspace(0.0, 1.0, n_coarse + 1)
    disp = np.zeros(n_coarse + 1)
    disp[1:-1] = amplitude * ((b - a) / n_coarse) * rng.uniform(
        -1.0, 1.0, n_coarse - 1
    )
    spline = CubicSpline(xi_c, disp, bc_type="periodic")
    return lambda xi: a + (b - a) * xi + spline(xi)


def geometric_nodes(bounds, n_cells, ratio=7.0):
    """Cell widths in geometric progression, largest/smallest = ratio."""
    a, b = bounds
    n = int(n_cells)
    q = ratio ** (1.0 / (n - 1))
    w = q ** np.arange(n)
    w *= (b - a) / w.sum()
    return np.concatenate([[a], a + np.cumsum(w)])


@dataclass(frozen=True)
class TensorGrid2D:
    """Tensor-product 2-D grid: x = x(xi), y = y(eta)."""

    axis_x: Grid1D
    axis_y: Grid1D

    @property
    def shape(self):
        return (self.axis_x.n_cells + 1, self.axis_y.n_cells + 1)

    def meshgrid(self):
        return np.meshgrid(self.axis_x.physical_nodes,
                           self.axis_y.physical_nodes, indexing="ij")


@dataclass(frozen=True)
class Segment:
    """Maximal run of interior nodes on one grid line, boundary included.

    ``nodes`` holds the segment coordinates: the two boundary intersection
    points plus the interior background nodes.  ``index_range`` are the
    background indices [first, last] of the interior nodes.
    """

    axis: int  # 0 = x-line (row of constant y), 1 = y-line
    line_index: int
    nodes: np.ndarray
    index_range: tuple

    @property
    def n_interior(self):
        return self.index_range[1] - self.index_range[0] + 1


@dataclass(frozen=True)
class EmbeddedDomain2D:
    """Non-rectangular domain cut out of a background tensor grid.

    ``pinned`` optionally marks interior nodes whose values are held at
    the boundary data's smooth extension (a band next to an interface,
    reinitialization style); None disables pinning.
    """

    background: TensorGrid2D
    x_lines: tuple  # x_lines[j] = tuple of Segments along row j
    y_lines: tuple
    inside: np.ndarray  # boolean mask over the background nodes
    boundary_value: object  # callable (x, y, t) -> float or None
    pinned: np.ndarray | None = None

    def interior_count(self):
        return int(self.inside.sum())


def _bisect_boundary(indicator, p_out, p_in, tol):
    """Bracketing bisection of a boolean indicator between two points."""
    p_out = np.asarray(p_out, dtype=float)
    p_in = np.asarray(p_in, dtype=float)
    for _ in range(200):
        mid = 0.5 * (p_out + p_in)
        if indicator(mid[0], mid[1]):
            p_in = mid
        else:
            p_out = mid
        if np.linalg.norm(p_in - p_out) <= tol:
            break
    return 0.5 * (p_out + p_in)


def embed_domain_2d(indicator, boundary_value, background, min_interior=8,
                    pin_band=None):
    """Cut the indicator's domain out of the background grid, per line.

    Every maximal run of interior nodes along a grid row or column becomes
    a Segment with boundary abscissae located by bisection (tolerance
    1e-12 of a cell).  Runs shorter than ``min_interior`` raise.
    """
    xs = background.axis_x.physical_nodes
    ys = background.axis_y.physical_nodes
    xx, yy = np.meshgrid(xs, ys, indexing="ij")
    inside = np.zeros(xx.shape, dtype=bool)
    for i in range(xx.shape[0]):
        for j in range(xx.shape[1]):
            inside[i, j] = bool(indicator(xx[i, j], yy[i, j]))
    # Domain must not touch the background edge: the boundary bracketing
    # below needs one exterior node on each side.
    if inside[0, :].any() or inside[-1, :].any() or inside[:, 0].any() \
            or inside[:, -1].any():
        raise InvalidMappingError("domain touches the background grid edge")

    def line_segments(axis, k):
        mask = inside[:, k] if axis == 0 else inside[k, :]
        coords = xs if axis == 0 else ys
        other = ys[k] if axis == 0 else xs[k]
        segs = []
        i = 0
        n = mask.size
        tol = 1e-12 * (coords[1] - coords[0])
        while i < n:
            if not mask[i]:
                i += 1
                continue
            j = i
            while j + 1 < n and mask[j + 1]:
                j += 1
            count = j - i + 1
            if count < min_interior:
                raise UnderResolvedSegmentError(
                    f"segment on line {k} (axis {axis}) has {count} interior "
                    f"nodes, fewer than {min_interior}"
                )
            if axis == 0:
                pt_l = _bisect_boundary(indicator, (coords[i - 1], other),
                                        (coords[i], other), tol)
                pt_r = _bisect_boundary(indicator, (coords[j + 1], other),
                                        (coords[j], other), tol)
                lo, hi = pt_l[0], pt_r[0]
            else:
                pt_l = _bisect_boundary(indicator, (other, coords[i - 1]),
                                        (other, coords[i]), tol)
                pt_r = _bisect_boundary(indicator, (other, coords[j + 1]),
                                        (other, coords[j]), tol)
                lo, hi = pt_l[1], pt_r[1]
            nodes = np.concatenate([[lo], coords[i : j + 1], [hi]])
            segs.append(Segment(axis, k, nodes, (i, j)))
            i = j + 1
        return tuple(segs)

    x_lines = tuple(line_segments(0, j) for j in range(ys.size))
    y_lines = tuple(line_segments(1, i) for i in range(xs.size))
    pinned = None
    if pin_band is not None:
        pinned = np.zeros_like(inside)
        for i in range(xx.shape[0]):
            for j in range(xx.shape[1]):
                pinned[i, j] = inside[i, j] and bool(pin_band(xx[i, j], yy[i, j]))
    return EmbeddedDomain2D(background, x_lines, y_lines, inside,
                            boundary_value, pinned)


def make_grid_1d(bounds, n_cells, mesh="uniform", periodic=False, seed=0):
    """Convenience constructor for the named mesh families."""
    if mesh == "uniform":
        nodes = uniform_nodes(bounds, n_cells)
    elif mesh == "perturbed":
        return build_grid_1d(perturbed_map(bounds, seed=seed), n_cells,
                             bounds, periodic=periodic)
    elif mesh == "geometric":
        nodes = geometric_nodes(bounds, n_cells)
    elif callable(mesh):
        return build_grid_1d(mesh, n_cells, bounds, periodic=periodic)
    else:
        raise InvalidMappingError(f"unknown mesh family {mesh!r}")
    return build_grid_1d(nodes, n_cells, bounds, periodic=periodic)
