"""Convex domains, gauge functions, and the parabolic weight.

Two domain kinds are supported: an open interval (a, b) and a disk.  Both
are star-shaped with respect to every interior point, which is what the
analysis machinery needs: an anchor point x0 inside the observation region
omega, a gauge (Minkowski functional) vanishing at the center, and the
quadratic weight

    phi(x) = -|x - x0|^2 / 4,

whose algebra (phi + |grad phi|^2 = 0, constant Laplacian, explicit normal
derivative) drives every weighted identity downstream.  The time profile is

    Upsilon(t) = T - t + h,      Phi(x, t) = s * phi(x) / Upsilon(t),

with s in (0, 1) and h > 0.  All evaluators are vectorized over points.

Everything here is immutable after construction; instances may be shared
freely between threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, InvalidDomainError, UsageError

_BOUNDARY_RTOL = 1e-9


def _as_points(domain, x):
    """Return points as an (m, dim) float array plus a scalar-input flag."""
    arr = np.asarray(x, dtype=float)
    if domain.dim == 1:
        scalar = arr.ndim == 0
        pts = np.atleast_1d(arr).reshape(-1, 1)
    else:
        scalar = arr.ndim == 1
        pts = np.atleast_2d(arr)
        if pts.shape[1] != 2:
            raise UsageError(f"disk points must have 2 coordinates, got shape {pts.shape}")
    return pts, scalar


@dataclass(frozen=True)
class OmegaSpec:
    """Observation region: subinterval (lo, hi) or open subdisk."""

    lo: float | None = None
    hi: float | None = None
    center: tuple[float, float] | None = None
    radius: float | None = None


@dataclass(frozen=True)
class DomainSpec:
    """Validated domain description with anchor point and observation region.

    Use the ``interval`` / ``disk`` classmethods; they run all geometric
    consistency checks (anchor strictly interior, omega compactly contained,
    anchor inside omega) and raise InvalidDomainError / ConfigurationError
    on violation.
    """

    kind: str
    a: float = 0.0
    b: float = 1.0
    center: tuple[float, float] = (0.0, 0.0)
    radius: float = 1.0
    x0: tuple[float, ...] = (0.0,)
    omega: OmegaSpec = field(default_factory=OmegaSpec)

    @classmethod
    def interval(cls, a, b, x0, omega_lo, omega_hi):
        a, b, x0, omega_lo, omega_hi = map(float, (a, b, x0, omega_lo, omega_hi))
        if not b > a:
            raise InvalidDomainError(f"interval needs a < b, got a={a}, b={b}")
        if x0 == a or x0 == b:
            raise InvalidDomainError(f"anchor x0={x0} lies on the boundary")
        if not (a < x0 < b):
            raise InvalidDomainError(f"anchor x0={x0} is outside ({a}, {b})")
        if not (a < omega_lo < omega_hi < b):
            raise ConfigurationError(
                f"omega=({omega_lo}, {omega_hi}) must satisfy a < lo < hi < b with a={a}, b={b}"
            )
        if not (omega_lo < x0 < omega_hi):
            raise ConfigurationError(f"anchor x0={x0} must lie inside omega=({omega_lo}, {omega_hi})")
        return cls(kind="interval", a=a, b=b, x0=(x0,),
                   omega=OmegaSpec(lo=omega_lo, hi=omega_hi))

    @classmethod
    def disk(cls, center, radius, x0, omega_center, omega_radius):
        center = tuple(float(c) for c in center)
        x0 = tuple(float(c) for c in x0)
        omega_center = tuple(float(c) for c in omega_center)
        radius = float(radius)
        omega_radius = float(omega_radius)
        if len(center) != 2 or len(x0) != 2 or len(omega_center) != 2:
            raise ConfigurationError("disk points need exactly 2 coordinates")
        if radius <= 0:
            raise InvalidDomainError(f"disk radius must be positive, got {radius}")
        d0 = float(np.hypot(x0[0] - center[0], x0[1] - center[1]))
        if d0 >= radius:
            raise InvalidDomainError(
                f"anchor x0={x0} is not strictly inside the disk (|x0-c|={d0}, R={radius})"
            )
        if omega_radius <= 0:
            raise ConfigurationError(f"omega radius must be positive, got {omega_radius}")
        dc = float(np.hypot(omega_center[0] - center[0], omega_center[1] - center[1]))
        if dc + omega_radius >= radius:
            raise ConfigurationError(
                "closure of omega must stay inside the open disk "
                f"(|c_omega-c|+r_omega={dc + omega_radius}, R={radius})"
            )
        dx0 = float(np.hypot(x0[0] - omega_center[0], x0[1] - omega_center[1]))
        if dx0 >= omega_radius:
            raise ConfigurationError(
                f"anchor x0={x0} must lie inside omega (dist={dx0}, r_omega={omega_radius})"
            )
        return cls(kind="disk", center=center, radius=radius, x0=x0,
                   omega=OmegaSpec(center=omega_center, radius=omega_radius))

    @property
    def dim(self):
        return 1 if self.kind == "interval" else 2

    @property
    def x0_array(self):
        return np.asarray(self.x0, dtype=float)

    @property
    def interval_center(self):
        return 0.5 * (self.a + self.b)

    @property
    def measures(self):
        """(|Omega|, |Gamma|): length and point count, or area and perimeter."""
        if self.kind == "interval":
            return self.b - self.a, 2.0
        return np.pi * self.radius ** 2, 2.0 * np.pi * self.radius

    def contains(self, x, boundary_ok=False):
        """Vectorized membership test for the closed (or open) domain."""
        pts, scalar = _as_points(self, x)
        tol = _BOUNDARY_RTOL * max(1.0, self._scale())
        if self.kind == "interval":
            lo, hi = (self.a - tol, self.b + tol) if boundary_ok else (self.a + tol, self.b - tol)
            inside = (pts[:, 0] >= lo) & (pts[:, 0] <= hi)
        else:
            d = np.hypot(pts[:, 0] - self.center[0], pts[:, 1] - self.center[1])
            lim = self.radius + tol if boundary_ok else self.radius - tol
            inside = d <= lim
        return bool(inside[0]) if scalar else inside

    def on_boundary(self, x):
        pts, scalar = _as_points(self, x)
        tol = _BOUNDARY_RTOL * max(1.0, self._scale())
        if self.kind == "interval":
            on = (np.abs(pts[:, 0] - self.a) <= tol) | (np.abs(pts[:, 0] - self.b) <= tol)
        else:
            d = np.hypot(pts[:, 0] - self.center[0], pts[:, 1] - self.center[1])
            on = np.abs(d - self.radius) <= tol
        return bool(on[0]) if scalar else on

    def outward_normal(self, x):
        """Outward unit normal at boundary points; UsageError off the boundary."""
        pts, scalar = _as_points(self, x)
        on = self.on_boundary(pts if self.dim == 2 else pts[:, 0])
        if not np.all(on):
            raise UsageError("outward_normal requested at a point off the boundary")
        if self.kind == "interval":
            mid = self.interval_center
            nrm = np.where(pts[:, 0] > mid, 1.0, -1.0).reshape(-1, 1)
        else:
            c = np.asarray(self.center)
            v = pts - c
            nrm = v / np.linalg.norm(v, axis=1, keepdims=True)
        return nrm[0] if scalar else nrm

    def _scale(self):
        if self.kind == "interval":
            return abs(self.a) + abs(self.b) + (self.b - self.a)
        return abs(self.center[0]) + abs(self.center[1]) + self.radius


@dataclass(frozen=True)
class WeightParams:
    """Carleman profile parameters: exponent fraction s, pad h, horizon T."""

    s: float
    h: float
    T: float

    def __post_init__(self):
        if not (0.0 < self.s < 1.0):
            raise ConfigurationError(f"s must lie in (0, 1), got {self.s}")
        if self.h <= 0.0:
            raise ConfigurationError(f"h must be positive, got {self.h}")
        if self.T <= 0.0:
            raise ConfigurationError(f"T must be positive, got {self.T}")

    @property
    def C0(self):
        """Drift exponent 1 - s^3 used by the frequency differential bound."""
        return 1.0 - self.s ** 3


def gauge(domain, x):
    """Minkowski functional of the domain about its center.

    Positively homogeneous of degree one, zero at the center, one on the
    boundary, and subadditive (the domain is convex).
    """
    pts, scalar = _as_points(domain, x)
    if domain.kind == "interval":
        mid = domain.interval_center
        half = 0.5 * (domain.b - domain.a)
        val = np.abs(pts[:, 0] - mid) / half
    else:
        c = np.asarray(domain.center)
        val = np.hypot(pts[:, 0] - c[0], pts[:, 1] - c[1]) / domain.radius
    return float(val[0]) if scalar else val


def level(domain, x):
    """Level function gauge^2 - 1: negative inside, zero on the boundary."""
    g = gauge(domain, x)
    return g * g - 1.0


@dataclass(frozen=True)
class PhiBundle:
    """Pointwise data of the spatial weight phi at a batch of points."""

    domain: DomainSpec
    points: np.ndarray
    phi: np.ndarray
    grad: np.ndarray
    laplacian: float

    @property
    def normal_deriv(self):
        """d(phi)/d(nu) at the batch points; UsageError unless all on boundary."""
        on = self.domain.on_boundary(self.points if self.domain.dim == 2 else self.points[:, 0])
        if not np.all(on):
            raise UsageError("normal_deriv of phi is defined on boundary points only")
        nrm = self.domain.outward_normal(self.points if self.domain.dim == 2 else self.points[:, 0])
        nrm = np.atleast_2d(nrm)
        return np.sum(self.grad * nrm, axis=1)


def weight_phi_bundle(domain, x):
    """Evaluate phi = -|x-x0|^2/4 with gradient and (constant) Laplacian.

    The returned bundle also exposes the outward normal derivative, which is
    only legal to read when every point lies on the boundary.
    """
    pts, _ = _as_points(domain, x)
    diff = pts - domain.x0_array.reshape(1, -1)
    phi = -0.25 * np.sum(diff * diff, axis=1)
    grad = -0.5 * diff
    return PhiBundle(domain=domain, points=pts, phi=phi, grad=grad,
                     laplacian=-0.5 * domain.dim)


def phi_tangential_gradient(domain, x):
    """Tangential part of grad phi at boundary points (zero for intervals)."""
    pts, _ = _as_points(domain, x)
    bundle = weight_phi_bundle(domain, pts)
    if domain.kind == "interval":
        return np.zeros_like(bundle.grad)
    nrm = domain.outward_normal(pts)
    normal_part = np.sum(bundle.grad * nrm, axis=1, keepdims=True) * nrm
    return bundle.grad - normal_part


def upsilon(params, t):
    """Time pad Upsilon(t) = T - t + h, valid for t in [0, T]."""
    t = float(t)
    if t < 0.0 or t > params.T:
        raise UsageError(f"t={t} outside [0, {params.T}]")
    return params.T - t + params.h


@dataclass(frozen=True)
class BigPhi:
    """Space-time weight Phi = s*phi/Upsilon with its time derivative."""

    Phi: np.ndarray
    dPhi_dt: np.ndarray
    Upsilon: float


def big_phi(params, domain, x, t):
    """Evaluate Phi(x, t) = s*phi(x)/Upsilon(t) and dPhi/dt = s*phi/Upsilon^2."""
    ups = upsilon(params, t)
    bundle = weight_phi_bundle(domain, x)
    return BigPhi(Phi=params.s * bundle.phi / ups,
                  dPhi_dt=params.s * bundle.phi / ups ** 2,
                  Upsilon=ups)


@dataclass(frozen=True)
class NormalSignReport:
    """Star-shapedness certificate: sign of -(x - x0) . nu over the boundary."""

    min_value: float
    max_value: float
    passed: bool


def check_normal_sign(domain):
    """Verify -(x - x0) . nu(x) < 0 over the whole boundary (closed form).

    For the interval this is a two-point check; for the disk the extreme
    values over the circle are -R -+ |x0 - c|.
    """
    x0 = domain.x0_array
    if domain.kind == "interval":
        vals = np.array([-(domain.a - x0[0]) * (-1.0), -(domain.b - x0[0]) * (+1.0)])
        lo, hi = float(vals.min()), float(vals.max())
    else:
        off = float(np.hypot(x0[0] - domain.center[0], x0[1] - domain.center[1]))
        lo, hi = -domain.radius - off, -domain.radius + off
    return NormalSignReport(min_value=lo, max_value=hi, passed=hi < 0.0)


def phi_extremes(domain):
    """(min phi over the closure, max phi over closure minus omega).

    Both are closed-form: phi decreases with distance from the anchor, so
    the minimum sits at the farthest point of the closure and the maximum
    outside omega sits at the nearest point of the complement.
    """
    x0 = domain.x0_array
    if domain.kind == "interval":
        far = max(x0[0] - domain.a, domain.b - x0[0])
        near_out = min(x0[0] - domain.omega.lo, domain.omega.hi - x0[0])
    else:
        off = float(np.hypot(x0[0] - domain.center[0], x0[1] - domain.center[1]))
        far = domain.radius + off
        d_oc = float(np.hypot(x0[0] - domain.omega.center[0], x0[1] - domain.omega.center[1]))
        near_out = domain.omega.radius - d_oc
    return -0.25 * far ** 2, -0.25 * near_out ** 2
