"""Frequency function machinery for the weighted flow.

The weighted state is F = E(t) U with E = exp(Phi/2).  Along the flow,

    dF/dt = P1 F,    P1 = diag(dPhi/dt / 2) + E A E^{-1},

and the splitting S = (P1 + P1*)/2, Aanti = (P1 - P1*)/2 is taken in the
discrete mass inner product, where P1* = M^{-1} P1^T M.  Because the
splitting is exact at the matrix level, the energy identity

    1/2 d/dt ||F||^2 + N(t) ||F||^2 = 0,    N = <-S F, F> / ||F||^2,

holds up to time discretization only, and the commutator identity for

    Q = <-S' F, F> - 2 <S F, Aanti F>

becomes a statement about convergence to the closed-form integrals, not an
exact discrete identity.  This module provides:

* the weighted operator bundle at a given time (with an overflow guard on
  the exponent),
* the frequency function and trace runner, including the fitted drift
  constant C in  Q <= (1 + C0)/Upsilon <-S F, F> + C/h^2 ||F||^2  with
  C0 = 1 - s^3,
* the commutator identity refinement study (interval, and disk with the
  anchor at the center so the weight is constant on the boundary),
* the three-point logarithmic interpolation inequality with the explicit
  exponent M and additive drift D,
* the telescoping constants M_ell, D_ell with their sign condition, and
* the empirical observability fit (beta, mu, K) with the derived
  penalization constants (M1, M2, delta).

All operations are pure functions of immutable inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import geometry
from .discretize import State, assemble_operator, build_grid
from .errors import (ConfigurationError, DegenerateDataError, FitFailureError,
                     ParameterError, UsageError)
from .evolve import Propagator, Schedule

PHI_EXP_GUARD = 700.0
SPRIME_DELTA_FACTOR = 1e-6
DEFAULT_SLACK = 1e-8


# ---------------------------------------------------------------------------
# weighted operator bundle
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WeightedOperators:
    """Weighted generator pieces frozen at one time t.

    E is the nodal weight exp(Phi/2); d = dPhi/dt / 2 is the diagonal part
    of P1.  eta and theta are the zero-order coefficients of the symmetric
    part predicted by the continuum calculus (bulk and trace), kept for
    diagnostics; the operator action itself uses the exact matrix
    splitting, not these fields.
    """

    ops: object
    params: geometry.WeightParams
    t: float
    upsilon: float
    E: np.ndarray
    d: np.ndarray
    eta: np.ndarray
    theta: np.ndarray

    def apply_B(self, x):
        return self.E * self.ops.apply_A(x / self.E)

    def apply_B_star(self, x):
        return self.ops.apply_A(self.E * x) / self.E

    def apply_P1(self, x):
        return self.d * x + self.apply_B(x)

    def apply_S(self, x):
        return self.d * x + 0.5 * (self.apply_B(x) + self.apply_B_star(x))

    def apply_Aanti(self, x):
        return 0.5 * (self.apply_B(x) - self.apply_B_star(x))

    def neg_S_form(self, x):
        """<-S x, x>, evaluated through the Dirichlet edge form."""
        x = np.asarray(x, dtype=float)
        diag = float(np.dot(self.ops.mass * self.d, x * x))
        return self.ops.dirichlet_form(x / self.E, self.E * x) - diag


def _weighted_ops_unchecked(ops, params, t):
    grid = ops.grid
    ups = params.T - t + params.h
    bundle = geometry.weight_phi_bundle(grid.domain, grid.points)
    Phi = params.s * bundle.phi / ups
    bad = np.abs(Phi) > PHI_EXP_GUARD
    if np.any(bad):
        raise ParameterError(
            f"|Phi| exceeds {PHI_EXP_GUARD} at {int(bad.sum())} nodes "
            f"(max {np.abs(Phi).max():.3g}); increase the pad h")
    dPhi_dt = params.s * bundle.phi / ups ** 2

    grad_Phi = params.s * bundle.grad / ups
    eta = 0.5 * (dPhi_dt + 0.5 * np.sum(grad_Phi * grad_Phi, axis=1))
    bpts = grid.points[grid.boundary_idx]
    tang = geometry.phi_tangential_gradient(grid.domain, bpts) * (params.s / ups)
    theta = 0.5 * (dPhi_dt[grid.boundary_idx] + 0.5 * np.sum(tang * tang, axis=1))

    return WeightedOperators(ops=ops, params=params, t=t, upsilon=ups,
                             E=np.exp(0.5 * Phi), d=0.5 * dPhi_dt,
                             eta=eta, theta=theta)


def build_weighted_operators(ops, params, t):
    """Weighted operator bundle at time t in [0, T]."""
    t = float(t)
    if t < 0.0 or t > params.T:
        raise UsageError(f"t={t} outside [0, {params.T}]")
    return _weighted_ops_unchecked(ops, params, t)


def frequency(wops, F):
    """Frequency N = <-S F, F> / ||F||^2; zero F is degenerate."""
    F = np.asarray(F, dtype=float)
    nf2 = wops.ops.inner(F, F)
    if nf2 <= 0.0:
        raise DegenerateDataError("frequency of a zero state is undefined")
    return wops.neg_S_form(F) / nf2


def s_prime_form(ops, params, t, F):
    """<S'(t) F, F> by centered differencing with delta = 1e-6 Upsilon(t)."""
    F = np.asarray(F, dtype=float)
    delta = SPRIME_DELTA_FACTOR * (params.T - t + params.h)
    hi = _weighted_ops_unchecked(ops, params, t + delta)
    lo = _weighted_ops_unchecked(ops, params, t - delta)
    return (-hi.neg_S_form(F) + lo.neg_S_form(F)) / (2.0 * delta)


def commutator_form(ops, params, t, F, wops=None):
    """Q(F) = <-S' F, F> - 2 <S F, Aanti F> at time t."""
    F = np.asarray(F, dtype=float)
    w = wops or _weighted_ops_unchecked(ops, params, t)
    cross = ops.inner(w.apply_S(F), w.apply_Aanti(F))
    return -s_prime_form(ops, params, t, F) - 2.0 * cross


# ---------------------------------------------------------------------------
# frequency trace along the flow
# ---------------------------------------------------------------------------

@dataclass
class FrequencyTrace:
    """Recorded weighted-flow diagnostics along one trajectory.

    Arrays are aligned with t.  neg_S is <-S F, F>; bound is the fitted
    drift bound (1 + C0)/Upsilon neg_S + C/h^2 normF2 with this trace's
    fitted C (the rate fit).  C_form is the quadratic-form variant, the
    smallest constant with Q <= (1 + C0)/Upsilon neg_S + C_form/h^2 normF2
    along the trace.  energy_residuals sit at the step midpoints and
    measure 1/2 d/dt ||F||^2 + <-S F, F>, which vanishes at order dt^2.
    """

    params: geometry.WeightParams
    t: np.ndarray
    normF2: np.ndarray
    N: np.ndarray
    Q: np.ndarray
    neg_S: np.ndarray
    bound: np.ndarray
    C: float
    C_form: float
    energy_times: np.ndarray
    energy_residuals: np.ndarray

    @property
    def C0(self):
        return self.params.C0

    def upsilon(self):
        return self.params.T - self.t + self.params.h

    def bound_with(self, C):
        return (1.0 + self.C0) / self.upsilon() * self.neg_S + (C / self.params.h ** 2) * self.normF2

    def rows(self):
        return np.column_stack([self.t, self.normF2, self.N, self.Q, self.bound])


def run_trace(ops, params, state0, sched):
    """Propagate state0 over the schedule and record the weighted diagnostics.

    Fits the smallest C >= 0 making the drift bound hold along this trace.
    The headline fit C maximizes dN/dt - (1 + C0) N / Upsilon over the
    trace (centered differencing) and scales by h^2; the quadratic-form
    variant C_form does the same with Q / ||F||^2 in place of dN/dt.  For
    the exact flow dN/dt <= Q / ||F||^2 pointwise, but the differenced N
    of an under-resolved trajectory also carries the time-discretization
    transient, so on rough data C can exceed C_form by orders of
    magnitude.  That direction keeps the certified form bound, which is
    what count_bound_violations checks, conservative.
    """
    if abs(sched.t1 - params.T) > 1e-12 * max(1.0, params.T) or sched.t0 != 0.0:
        raise UsageError(
            f"schedule [{sched.t0}, {sched.t1}] must match the weight horizon [0, {params.T}]")
    if ops.norm(state0) == 0.0:
        raise DegenerateDataError("cannot trace a zero initial state")

    prop = Propagator(ops, sched.dt, sched.scheme)
    times = sched.times()
    n_rec = times.size
    states = np.empty((n_rec, ops.n_dofs))
    states[0] = state0.values
    u = state0.values.copy()
    for k in range(sched.steps):
        u = prop.step(u)
        states[k + 1] = u

    normF2 = np.empty(n_rec)
    N = np.empty(n_rec)
    Q = np.empty(n_rec)
    neg_S = np.empty(n_rec)
    for k, t in enumerate(times):
        w = _weighted_ops_unchecked(ops, params, t)
        F = w.E * states[k]
        nf2 = ops.inner(F, F)
        if nf2 <= 0.0:
            raise DegenerateDataError(f"weighted state vanished at t={t}")
        ns = w.neg_S_form(F)
        normF2[k] = nf2
        neg_S[k] = ns
        N[k] = ns / nf2
        Q[k] = commutator_form(ops, params, t, F, wops=w)

    # midpoint energy-identity residuals, O(dt^2) by construction
    t_mid = 0.5 * (times[:-1] + times[1:])
    resid = np.empty(t_mid.size)
    for k, tm in enumerate(t_mid):
        w = _weighted_ops_unchecked(ops, params, tm)
        Fm = w.E * (0.5 * (states[k] + states[k + 1]))
        resid[k] = 0.5 * (normF2[k + 1] - normF2[k]) / sched.dt + w.neg_S_form(Fm)

    C0 = params.C0
    ups = params.T - times + params.h
    h2 = params.h ** 2
    C_form = float(max(0.0, np.max(h2 * (Q - (1.0 + C0) / ups * neg_S) / normF2)))
    if n_rec >= 3:
        dN = (N[2:] - N[:-2]) / (times[2:] - times[:-2])
        mid = slice(1, -1)
        C = float(max(0.0, np.max(h2 * (dN - (1.0 + C0) / ups[mid] * N[mid]))))
    else:
        C = 0.0

    bound = (1.0 + C0) / ups * neg_S + (C / h2) * normF2
    return FrequencyTrace(params=params, t=times, normF2=normF2, N=N, Q=Q,
                          neg_S=neg_S, bound=bound, C=C, C_form=C_form,
                          energy_times=t_mid, energy_residuals=resid)


def fit_bound_constant(traces):
    """Smallest C >= 0 valid for every trace in the collection."""
    if not traces:
        raise ConfigurationError("need at least one trace to fit C")
    return max(tr.C for tr in traces)


def count_bound_violations(trace, C, slack=DEFAULT_SLACK):
    """Recorded times where Q exceeds the drift bound with constant C."""
    rhs = trace.bound_with(C)
    scale = np.maximum(1.0, np.maximum(np.abs(trace.Q), np.abs(rhs)))
    return int(np.sum(trace.Q > rhs + slack * scale))


# ---------------------------------------------------------------------------
# commutator identity refinement study
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CommutatorReport:
    """Residuals of the weighted commutator identity across refinements."""

    resolutions: tuple
    spacings: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    residual: np.ndarray
    rel_residual: np.ndarray
    orders: np.ndarray


def _require_constant_boundary_weight(domain):
    if domain.kind == "disk":
        off = np.hypot(domain.x0[0] - domain.center[0], domain.x0[1] - domain.center[1])
        if off > 1e-12 * domain.radius:
            raise ConfigurationError(
                "the boundary identity check needs the weight constant on the "
                "boundary; move the anchor to the disk center (offset "
                f"{off:.3g})")


class InteriorBump:
    """Smooth compactly supported test family for identity checks.

    value(x) = exp(-1 / (1 - |x - center|^2 / width^2)) inside the ball of
    the given width, zero outside; infinitely differentiable, so interior
    quadrature errors converge at second order.
    """

    def __init__(self, center, width):
        self.center = np.atleast_1d(np.asarray(center, dtype=float))
        self.width = float(width)
        if self.width <= 0.0:
            raise ConfigurationError(f"bump width must be positive, got {width}")

    def _squared_radius(self, pts):
        d = pts - self.center[None, :]
        return np.sum(d * d, axis=1) / self.width ** 2, d

    def value(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        t, _ = self._squared_radius(pts)
        out = np.zeros(pts.shape[0])
        inside = t < 1.0
        out[inside] = np.exp(-1.0 / (1.0 - t[inside]))
        return out

    def gradient(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        t, d = self._squared_radius(pts)
        out = np.zeros_like(pts)
        inside = t < 1.0
        ti = t[inside]
        f = np.exp(-1.0 / (1.0 - ti))
        scale = -f / (1.0 - ti) ** 2 * (2.0 / self.width ** 2)
        out[inside] = scale[:, None] * d[inside]
        return out


def commutator_rhs(ops, params, t, family):
    """Grid quadrature of the closed-form right side of the identity.

    Needs the weight constant along the boundary (interval, or disk with a
    centered anchor), which kills every term driven by tangential
    derivatives of phi.
    """
    grid = ops.grid
    _require_constant_boundary_weight(grid.domain)
    s = params.s
    ups = params.T - t + params.h

    pts = grid.points
    bundle = geometry.weight_phi_bundle(grid.domain, pts)
    f = np.asarray(family.value(pts), dtype=float)
    gf = np.asarray(family.gradient(pts), dtype=float)
    grad_phi_sq = np.sum(bundle.grad * bundle.grad, axis=1)

    wb = grid.w_bulk
    bulk = (
        -(s / ups ** 3) * np.dot(wb, (bundle.phi + 0.5 * s * grad_phi_sq) * f * f)
        + (s / ups) * np.dot(wb, np.sum(gf * gf, axis=1))
        - (s ** 2 * (2.0 - s) / (4.0 * ups ** 3)) * np.dot(wb, grad_phi_sq * f * f)
    )

    bidx = grid.boundary_idx
    wt = grid.w_trace[bidx]
    bpts = pts[bidx]
    nrm = grid.normals
    phi_b = bundle.phi[bidx]
    dn_phi = np.sum(bundle.grad[bidx] * nrm, axis=1)
    f_b = f[bidx]
    dn_f = np.sum(gf[bidx] * nrm, axis=1)
    tang_phi = geometry.phi_tangential_gradient(grid.domain, bpts)
    tang_phi_sq = np.sum(tang_phi * tang_phi, axis=1)
    lap_phi = bundle.laplacian

    # with phi constant on the boundary, its tangential Hessian and
    # Laplace-Beltrami terms drop; the surviving boundary family is below
    boundary = (
        (s / ups) * np.dot(wt, dn_phi * dn_f * dn_f)
        - (s / ups ** 3) * np.dot(wt, (phi_b + 0.5 * s * tang_phi_sq) * f_b * f_b)
        + (s / ups) * np.dot(wt, (lap_phi + dn_phi) * dn_f * f_b)
        + (s ** 3 / (4.0 * ups ** 3)) * np.dot(wt, dn_phi ** 3 * f_b * f_b)
    )
    return bulk + boundary


def commutator_identity_check(domain, params, t, family, resolutions):
    """Refinement study of LHS = Q(F) against the closed-form right side.

    resolutions: list of n (interval) or (nr, ntheta) pairs (disk).  The
    family is sampled on each grid; zero families yield zero residuals.
    """
    _require_constant_boundary_weight(domain)
    if len(resolutions) < 1:
        raise ConfigurationError("need at least one resolution")
    lhs_list, rhs_list, spacing = [], [], []
    for res in resolutions:
        if domain.kind == "interval":
            grid = build_grid(domain, n=res)
            spacing.append(grid.spacing[0])
        else:
            nr, ntheta = res
            grid = build_grid(domain, nr=nr, ntheta=ntheta)
            spacing.append(grid.spacing[0])
        ops = assemble_operator(grid)
        F = np.asarray(family.value(grid.points), dtype=float)
        lhs_list.append(commutator_form(ops, params, t, F))
        rhs_list.append(commutator_rhs(ops, params, t, family))

    lhs = np.array(lhs_list)
    rhs = np.array(rhs_list)
    resid = np.abs(lhs - rhs)
    scale = np.maximum(np.abs(rhs), 1e-300)
    rel = resid / scale
    spacing = np.array(spacing)
    with np.errstate(divide="ignore", invalid="ignore"):
        orders = np.log(rel[:-1] / rel[1:]) / np.log(spacing[:-1] / spacing[1:])
    return CommutatorReport(resolutions=tuple(resolutions), spacings=spacing,
                            lhs=lhs, rhs=rhs, residual=resid,
                            rel_residual=rel, orders=orders)


# ---------------------------------------------------------------------------
# three-point interpolation inequality
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InterpolationRecord:
    times: tuple
    M: float
    D: float
    lhs_log: float
    rhs_log: float
    passed: bool


def interpolation_exponent(params, t1, t2, t3):
    """Closed-form exponent M = I(t2,t3)/I(t1,t2) for the weight
    (T - t + h)^{-(1+C0)}, via the explicit antiderivative."""
    C0 = params.C0
    T, h = params.T, params.h

    def anti(t):
        return (T - t + h) ** (-C0) / C0

    denom = anti(t2) - anti(t1)
    if denom <= 0.0:
        raise UsageError(f"need t1 < t2, got t1={t1}, t2={t2}")
    return (anti(t3) - anti(t2)) / denom


def interpolation_check(times, normF2, params, C, triples, slack=DEFAULT_SLACK):
    """Check (||F(t2)||^2)^{1+M} <= (||F(t1)||^2)^M ||F(t3)||^2 e^D
    on index triples of the trace, with D = 2 (1+M) (t3-t1)^2 C / h^2.

    Comparison happens in log space; slack is relative.  Returns the list
    of per-triple records.
    """
    times = np.asarray(times, dtype=float)
    normF2 = np.asarray(normF2, dtype=float)
    if np.any(normF2 <= 0.0):
        raise DegenerateDataError("interpolation needs strictly positive ||F||^2")
    records = []
    for (i1, i2, i3) in triples:
        if not (0 <= i1 < i2 <= i3 < times.size):
            raise UsageError(f"triple ({i1}, {i2}, {i3}) must satisfy i1 < i2 <= i3 in range")
        t1, t2, t3 = times[i1], times[i2], times[i3]
        M = interpolation_exponent(params, t1, t2, t3)
        D = 2.0 * (1.0 + M) * (t3 - t1) ** 2 * C / params.h ** 2
        lhs = (1.0 + M) * np.log(normF2[i2])
        rhs = M * np.log(normF2[i1]) + np.log(normF2[i3]) + D
        tol = slack * max(1.0, abs(lhs), abs(rhs))
        records.append(InterpolationRecord(times=(t1, t2, t3), M=float(M), D=float(D),
                                           lhs_log=float(lhs), rhs_log=float(rhs),
                                           passed=bool(lhs <= rhs + tol)))
    return records


# ---------------------------------------------------------------------------
# telescoping constants and sign condition
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StepConstants:
    C0: float
    C: float
    ell: float
    M_ell: float
    D_ell: float
    sign_lhs: float
    sign_ok: bool


def step_constants(domain, params, C, ell):
    """Telescoping constants M_ell, D_ell for chain length ell > 1.

    M_ell = ((ell+1)^C0 - 1) / (1 - ((ell+1)/(2 ell+1))^C0),
    D_ell = 2 C ell^2 (1 + M_ell),
    together with the geometric sign condition
    -(1 + M_ell)/(1 + ell) min phi + max_{outside omega} phi < 0.
    """
    if ell <= 1.0:
        raise ParameterError(f"chain length ell must exceed 1, got {ell}")
    C0 = params.C0
    M_ell = ((ell + 1.0) ** C0 - 1.0) / (1.0 - ((ell + 1.0) / (2.0 * ell + 1.0)) ** C0)
    D_ell = 2.0 * C * ell ** 2 * (1.0 + M_ell)
    phi_min, phi_max_out = geometry.phi_extremes(domain)
    sign_lhs = -(1.0 + M_ell) / (1.0 + ell) * phi_min + phi_max_out
    return StepConstants(C0=C0, C=C, ell=float(ell), M_ell=float(M_ell),
                         D_ell=float(D_ell), sign_lhs=float(sign_lhs),
                         sign_ok=bool(sign_lhs < 0.0))


# ---------------------------------------------------------------------------
# empirical observability fit
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ObservabilityFit:
    """Fitted final-state observability estimate and derived constants.

    The estimate reads ||U(T)|| <= (mu e^{K/T} ||u(T)||_omega)^beta
    ||U(0)||^{1-beta}.  The prefactor decomposition splits the fitted
    product G = mu e^{K/T} evenly in log scale, and the penalization
    constants follow the explicit formulas M1 = K1^{1/beta}
    (1-beta)^{(1-beta)/(2 beta)} beta^{1/2}, M2 = K2/beta,
    delta = (1-beta)/beta with K1 = mu^beta, K2 = beta K.
    """

    beta: float
    log_G: float
    mu: float
    K: float
    K1: float
    K2: float
    M1: float
    M2: float
    delta: float
    T: float
    n_members: int

    def kappa0(self, horizon, eps):
        """Penalization seed M1 e^{M2/horizon} / eps^delta."""
        if horizon <= 0.0 or eps <= 0.0:
            raise UsageError(f"need positive horizon and eps, got {horizon}, {eps}")
        return self.M1 * np.exp(self.M2 / horizon) / eps ** self.delta


def derive_penalization_constants(beta, K1, K2):
    """(M1, M2, delta) from the interpolation step of the duality argument."""
    if not (0.0 < beta < 1.0):
        raise UsageError(f"beta must lie in (0, 1), got {beta}")
    M1 = K1 ** (1.0 / beta) * (1.0 - beta) ** ((1.0 - beta) / (2.0 * beta)) * np.sqrt(beta)
    M2 = K2 / beta
    delta = (1.0 - beta) / beta
    return float(M1), float(M2), float(delta)


def ensemble_observation_data(ops, sched, states):
    """Per-member (final norm, omega observation, initial norm) triples."""
    prop = Propagator(ops, sched.dt, sched.scheme)
    a, b, c = [], [], []
    for st in states:
        c_i = ops.norm(st)
        if c_i == 0.0:
            raise DegenerateDataError("observability ensemble contains a zero state")
        u = st.values.copy()
        for _ in range(sched.steps):
            u = prop.step(u)
        a.append(ops.norm(u))
        b.append(ops.norm_omega(u[ops.grid.omega_idx]))
        c.append(c_i)
    return np.array(a), np.array(b), np.array(c)


def fit_observability_constants(ops, sched, states):
    """Fit beta in (0, 1) and the smallest prefactor from an ensemble of runs.

    Least squares in log scale on log(a/c) = beta log(b/c) + beta log G,
    followed by a shift of log G so the inequality holds with equality for
    at least one member.  Degenerate ensembles (identical observations) and
    slopes outside (0, 1) raise FitFailureError.
    """
    if len(states) < 2:
        raise ConfigurationError(f"observability fit needs >= 2 members, got {len(states)}")
    a, b, c = ensemble_observation_data(ops, sched, states)
    if np.any(a <= 0.0) or np.any(b <= 0.0):
        raise DegenerateDataError("observability fit needs nonvanishing final states "
                                  "and observations")
    y = np.log(a) - np.log(c)
    x = np.log(b) - np.log(c)
    if float(np.std(x)) < 1e-12:
        raise FitFailureError("degenerate ensemble: identical observation ratios",
                              diagnostics={"x": x.tolist(), "y": y.tolist()})
    beta, intercept = np.polyfit(x, y, 1)
    beta = float(beta)
    if not (0.0 < beta < 1.0):
        raise FitFailureError(
            f"fitted exponent beta={beta:.6g} left (0, 1); the ensemble does not "
            "separate observation from dissipation",
            diagnostics={"beta": beta, "intercept": float(intercept)})
    log_G = float(np.max((y - beta * x) / beta))

    T = sched.t1 - sched.t0
    if log_G > 0.0:
        mu = float(np.exp(0.5 * log_G))
        K = float(0.5 * T * log_G)
    else:
        mu = float(np.exp(log_G))
        K = 0.0
    K1 = mu ** beta
    K2 = beta * K
    M1, M2, delta = derive_penalization_constants(beta, K1, K2)
    return ObservabilityFit(beta=beta, log_G=log_G, mu=mu, K=K, K1=K1, K2=K2,
                            M1=M1, M2=M2, delta=delta, T=float(T),
                            n_members=len(states))


def count_observability_violations(fit, ops, sched, states, slack=1e-12):
    """Members violating the fitted estimate beyond a relative slack."""
    a, b, c = ensemble_observation_data(ops, sched, states)
    lhs = np.log(a)
    rhs = fit.beta * (fit.log_G + np.log(b)) + (1.0 - fit.beta) * np.log(c)
    tol = slack * np.maximum(1.0, np.maximum(np.abs(lhs), np.abs(rhs)))
    return int(np.sum(lhs > rhs + tol))


def diverse_ensemble(ops, count, seed, sched=None, omega_free_fraction=0.2):
    """Seeded ensemble of unit states with varied spectral and spatial content.

    Cycles through raw noise, mean-free noise, smoothed noise (a few steps
    of the flow), and noise concentrated away from omega.  The mix spreads
    the observation-to-norm ratios, which an informative observability fit
    needs; identical-member ensembles are degenerate by design.
    """
    rng = np.random.default_rng(seed)
    grid = ops.grid
    n = grid.n_dofs
    prop = None
    if sched is not None:
        prop = Propagator(ops, sched.dt, sched.scheme)
    ones = np.ones(n)
    ones_nrm2 = ops.inner(ones, ones)
    off_omega = np.setdiff1d(np.arange(n), grid.omega_idx)

    members = []
    for k in range(count):
        u = rng.standard_normal(n)
        mode = k % 5
        if mode == 1:
            u -= ops.inner(u, ones) / ones_nrm2 * ones
        elif mode == 2 and prop is not None:
            for _ in range(2):
                u = prop.step(u)
        elif mode == 3 and prop is not None:
            u -= ops.inner(u, ones) / ones_nrm2 * ones
            for _ in range(4):
                u = prop.step(u)
        elif mode == 4:
            v = np.zeros(n)
            v[off_omega] = rng.standard_normal(off_omega.size)
            u = v + omega_free_fraction * u
        nrm = ops.norm(u)
        members.append(State(grid, u / nrm))
    return members
