"""Grids, coupled-state vectors, and the bulk/boundary operator.

The state space pairs a bulk field on Omega with a trace field on Gamma,
with the trace sharing the unknowns of the bulk boundary nodes (one degree
of freedom per node).  The discrete inner product is

    <U, V> = sum_i w_bulk[i] U_i V_i + sum_{i on Gamma} w_trace[i] U_i V_i,

so the mass vector is m = w_bulk + w_trace.  The generator is assembled
from the Dirichlet energy

    E(U, V) = int_Omega grad u . grad v + int_Gamma grad_G u . grad_G v,

discretized as a sum over grid edges: E(U, V) = (D U) . (g * (D V)) with a
signed incidence matrix D and positive edge weights g.  The operator is
A = -M^{-1} K with K = D^T diag(g) D, which makes A self-adjoint and
dissipative in the mass inner product by construction, annihilates
constants exactly (edge differences of a constant vanish in floating
point), and couples each boundary node to its interior neighbour through
the flux term that realizes the dynamic boundary condition.

Grids: a uniform interval with trapezoid bulk weights and unit point
masses on the two ends, and a polar disk grid with half-offset radii
(first ring at dr/2, so the coordinate singularity at r = 0 never carries
a node) plus a boundary ring at r = R.  Both quadratures reproduce the
domain measures exactly.

Grid, State, and OperatorSet instances are immutable after construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import ConfigurationError, UsageError

MIN_INTERVAL_NODES = 4
MIN_RADIAL_CELLS = 2
MIN_ANGULAR_CELLS = 4


@dataclass(frozen=True)
class Grid:
    """Node set with quadrature weights and boundary/observation index maps.

    points has shape (n, dim).  w_bulk and w_trace have length n; w_trace
    vanishes off the boundary.  normals holds the outward unit normal per
    boundary node, aligned with boundary_idx.
    """

    domain: object
    points: np.ndarray
    w_bulk: np.ndarray
    w_trace: np.ndarray
    boundary_idx: np.ndarray
    interior_idx: np.ndarray
    normals: np.ndarray
    omega_idx: np.ndarray
    shape: tuple
    spacing: tuple

    def __post_init__(self):
        for name in ("points", "w_bulk", "w_trace", "boundary_idx",
                     "interior_idx", "normals", "omega_idx"):
            getattr(self, name).setflags(write=False)

    @property
    def n_dofs(self):
        return self.points.shape[0]

    @property
    def dim(self):
        return self.points.shape[1]

    @property
    def mass(self):
        return self.w_bulk + self.w_trace


def build_grid(domain, n=None, nr=None, ntheta=None):
    """Build the grid matching the domain kind.

    Interval: n equally spaced nodes including both endpoints.
    Disk: nr interior rings at radii (i + 1/2) dr plus a boundary ring of
    ntheta nodes at r = R, with dr = R / (nr + 1/2).
    """
    if domain.kind == "interval":
        if n is None:
            raise ConfigurationError("interval grid needs n")
        n = int(n)
        if n < MIN_INTERVAL_NODES:
            raise ConfigurationError(f"interval grid needs n >= {MIN_INTERVAL_NODES}, got {n}")
        return _interval_grid(domain, n)
    if nr is None or ntheta is None:
        raise ConfigurationError("disk grid needs nr and ntheta")
    nr, ntheta = int(nr), int(ntheta)
    if nr < MIN_RADIAL_CELLS or ntheta < MIN_ANGULAR_CELLS:
        raise ConfigurationError(
            f"disk grid needs nr >= {MIN_RADIAL_CELLS} and ntheta >= {MIN_ANGULAR_CELLS}, "
            f"got nr={nr}, ntheta={ntheta}")
    return _disk_grid(domain, nr, ntheta)


def _interval_grid(domain, n):
    a, b = domain.a, domain.b
    dx = (b - a) / (n - 1)
    x = a + dx * np.arange(n)
    points = x.reshape(-1, 1)

    w_bulk = np.full(n, dx)
    w_bulk[0] = w_bulk[-1] = 0.5 * dx
    w_trace = np.zeros(n)
    w_trace[0] = w_trace[-1] = 1.0

    boundary_idx = np.array([0, n - 1])
    interior_idx = np.arange(1, n - 1)
    normals = np.array([[-1.0], [1.0]])

    lo, hi = domain.omega.lo, domain.omega.hi
    omega_idx = np.nonzero((x >= lo) & (x <= hi))[0]
    if omega_idx.size == 0:
        raise ConfigurationError(f"omega=({lo}, {hi}) contains no grid nodes at n={n}")

    return Grid(domain=domain, points=points, w_bulk=w_bulk, w_trace=w_trace,
                boundary_idx=boundary_idx, interior_idx=interior_idx,
                normals=normals, omega_idx=omega_idx, shape=(n,), spacing=(dx,))


def _disk_grid(domain, nr, ntheta):
    R = domain.radius
    cx, cy = domain.center
    dr = R / (nr + 0.5)
    dtheta = 2.0 * np.pi / ntheta
    radii = (np.arange(nr) + 0.5) * dr
    theta = dtheta * np.arange(ntheta)

    # interior nodes first (ring-major), boundary ring last
    rr = np.repeat(radii, ntheta)
    tt = np.tile(theta, nr)
    pts_int = np.column_stack([cx + rr * np.cos(tt), cy + rr * np.sin(tt)])
    pts_bnd = np.column_stack([cx + R * np.cos(theta), cy + R * np.sin(theta)])
    points = np.vstack([pts_int, pts_bnd])
    n_int = nr * ntheta
    n = n_int + ntheta

    w_bulk = np.empty(n)
    w_bulk[:n_int] = np.repeat(radii * dr * dtheta, ntheta)
    # outermost half cell r in [nr*dr, R] is carried by the boundary nodes
    w_bulk[n_int:] = 0.5 * (R ** 2 - (nr * dr) ** 2) * dtheta
    w_trace = np.zeros(n)
    w_trace[n_int:] = R * dtheta

    boundary_idx = np.arange(n_int, n)
    interior_idx = np.arange(n_int)
    normals = np.column_stack([np.cos(theta), np.sin(theta)])

    oc = np.asarray(domain.omega.center)
    d = np.hypot(points[:, 0] - oc[0], points[:, 1] - oc[1])
    omega_idx = np.nonzero(d <= domain.omega.radius)[0]
    if omega_idx.size == 0:
        raise ConfigurationError(
            f"omega disk (r={domain.omega.radius}) contains no grid nodes at nr={nr}, ntheta={ntheta}")

    return Grid(domain=domain, points=points, w_bulk=w_bulk, w_trace=w_trace,
                boundary_idx=boundary_idx, interior_idx=interior_idx,
                normals=normals, omega_idx=omega_idx,
                shape=(nr, ntheta), spacing=(dr, dtheta))


class State:
    """Coupled bulk/trace state: one value per grid node.

    Boundary nodes carry both the bulk sample and the trace value (a single
    unknown), so .trace is a view into the same degrees of freedom.
    """

    __slots__ = ("grid", "values")

    def __init__(self, grid, values):
        values = np.asarray(values, dtype=float)
        if values.shape != (grid.n_dofs,):
            raise UsageError(f"state needs shape ({grid.n_dofs},), got {values.shape}")
        self.grid = grid
        self.values = values

    @classmethod
    def zeros(cls, grid):
        return cls(grid, np.zeros(grid.n_dofs))

    @classmethod
    def from_function(cls, grid, fn):
        """Sample a callable of the node coordinates; fn gets an (n, dim) array."""
        return cls(grid, np.asarray(fn(grid.points), dtype=float))

    @classmethod
    def from_parts(cls, grid, bulk, trace):
        """Build from separate bulk and trace vectors, which must agree on Gamma."""
        bulk = np.asarray(bulk, dtype=float)
        trace = np.asarray(trace, dtype=float)
        if bulk.shape != (grid.n_dofs,):
            raise UsageError(f"bulk part needs shape ({grid.n_dofs},), got {bulk.shape}")
        if trace.shape != (grid.boundary_idx.size,):
            raise UsageError(
                f"trace part needs shape ({grid.boundary_idx.size},), got {trace.shape}")
        if not np.array_equal(bulk[grid.boundary_idx], trace):
            raise UsageError("trace part must equal the bulk values on boundary nodes")
        return cls(grid, bulk)

    @classmethod
    def random(cls, grid, rng):
        return cls(grid, rng.standard_normal(grid.n_dofs))

    @property
    def bulk(self):
        return self.values

    @property
    def trace(self):
        return self.values[self.grid.boundary_idx]

    def copy(self):
        return State(self.grid, self.values.copy())


def _values(u):
    return u.values if isinstance(u, State) else np.asarray(u, dtype=float)


@dataclass(frozen=True)
class OperatorSet:
    """Assembled mass and stiffness with the action A = -M^{-1} K.

    K is kept in two forms: an incidence factorization (D, g) used for
    operator application (exact on constants) and a CSR matrix used to
    build time-stepping systems and dense oracles.
    """

    grid: Grid
    mass: np.ndarray
    K: sp.csr_matrix
    incidence: sp.csr_matrix
    edge_weights: np.ndarray
    _mass_omega: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        self.mass.setflags(write=False)
        self.edge_weights.setflags(write=False)
        object.__setattr__(self, "_mass_omega", self.grid.w_bulk[self.grid.omega_idx].copy())
        self._mass_omega.setflags(write=False)

    @property
    def n_dofs(self):
        return self.grid.n_dofs

    # -- inner products -------------------------------------------------
    def inner(self, u, v):
        return float(np.dot(self.mass * _values(u), _values(v)))

    def norm(self, u):
        return float(np.sqrt(max(self.inner(u, u), 0.0)))

    def inner_omega(self, u, v):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        if u.shape != self._mass_omega.shape or v.shape != self._mass_omega.shape:
            raise UsageError(f"omega vectors need shape {self._mass_omega.shape}")
        return float(np.dot(self._mass_omega * u, v))

    def norm_omega(self, u):
        return float(np.sqrt(max(self.inner_omega(u, u), 0.0)))

    # -- operator action -------------------------------------------------
    def apply_K(self, u):
        w = self.incidence @ _values(u)
        return self.incidence.T @ (self.edge_weights * w)

    def apply_A(self, u):
        return -self.apply_K(u) / self.mass

    def apply_A_state(self, u):
        return State(self.grid, self.apply_A(u))

    def dirichlet_form(self, u, v):
        """Energy E(u, v) = (D u) . (g * (D v)); nonnegative for u = v."""
        return float(np.dot(self.edge_weights * (self.incidence @ _values(u)),
                            self.incidence @ _values(v)))

    def dense_A(self):
        """Dense operator matrix for small-grid oracles."""
        return -self.K.toarray() / self.mass[:, None]

    # -- observation region ----------------------------------------------
    def restrict_omega(self, u):
        return _values(u)[self.grid.omega_idx].copy()

    def embed_omega(self, v):
        v = np.asarray(v, dtype=float)
        if v.shape != (self.grid.omega_idx.size,):
            raise UsageError(
                f"omega payload needs shape ({self.grid.omega_idx.size},), got {v.shape}")
        full = np.zeros(self.n_dofs)
        full[self.grid.omega_idx] = v
        return State(self.grid, full)


def _edges_interval(grid):
    n = grid.n_dofs
    dx = grid.spacing[0]
    i = np.arange(n - 1)
    return np.column_stack([i, i + 1]), np.full(n - 1, 1.0 / dx)


def _edges_disk(grid):
    nr, ntheta = grid.shape
    dr, dtheta = grid.spacing
    n_int = nr * ntheta
    edges = []
    weights = []

    def ring(i, j):
        return i * ntheta + j

    j = np.arange(ntheta)
    # radial fluxes between consecutive rings, weighted by the edge radius
    for i in range(nr - 1):
        edges.append(np.column_stack([ring(i, j), ring(i + 1, j)]))
        weights.append(np.full(ntheta, (i + 1) * dr * dtheta / dr))
    # radial flux from the last ring into the boundary ring
    edges.append(np.column_stack([ring(nr - 1, j), n_int + j]))
    weights.append(np.full(ntheta, nr * dr * dtheta / dr))
    # angular fluxes within each ring
    jn = (j + 1) % ntheta
    for i in range(nr):
        r = (i + 0.5) * dr
        edges.append(np.column_stack([ring(i, j), ring(i, jn)]))
        weights.append(np.full(ntheta, dr / (r * dtheta)))
    # angular flux of the outermost half cell, carried by the boundary nodes
    r_half = (nr + 0.25) * dr
    edges.append(np.column_stack([n_int + j, n_int + jn]))
    weights.append(np.full(ntheta, 0.5 * dr / (r_half * dtheta)))
    # Laplace-Beltrami coupling along the boundary ring
    edges.append(np.column_stack([n_int + j, n_int + jn]))
    weights.append(np.full(ntheta, 1.0 / (grid.domain.radius * dtheta)))

    return np.vstack(edges), np.concatenate(weights)


def assemble_operator(grid):
    """Assemble mass and stiffness for the coupled bulk/boundary generator."""
    if grid.domain.kind == "interval":
        edges, g = _edges_interval(grid)
    else:
        edges, g = _edges_disk(grid)

    n_edges = edges.shape[0]
    rows = np.repeat(np.arange(n_edges), 2)
    cols = edges.ravel()
    vals = np.tile([1.0, -1.0], n_edges)
    D = sp.csr_matrix((vals, (rows, cols)), shape=(n_edges, grid.n_dofs))

    K = (D.T @ sp.diags(g) @ D).tocsr()
    K.sum_duplicates()

    return OperatorSet(grid=grid, mass=grid.mass.copy(), K=K,
                       incidence=D, edge_weights=g.copy())
