"""Coupled planar-Hamiltonian systems and their large-amplitude modification.

State layout: z = (x in R^M, y in R^M, u, v) with w = (u, v).  The flow is

    x' =  grad_y H(t,x,y) + grad_y P(t,x,y,w)
    y' = -grad_x H(t,x,y) - grad_x P(t,x,y,w)
    J w' = F(t,w) + grad_w P(t,x,y,w),      J = [[0,-1],[1,0]]

The structural decomposition writes F as a pointwise convex combination of
two homogeneous gradients plus a bounded remainder,

    F(t,w) = (1-gamma) grad H1(w) + gamma grad H2(w) + grad_w Q(t,w),

either globally or per quadrant.  ``modify_system`` replaces F outside a disc
of radius rho by the average field, interpolating on rho <= |w| <= rho^3
through a cutoff profile whose derivative obeys
``-1/(xi ln xi) <= eta'(xi) <= 0``, so the modified field is unchanged for
|w| <= rho and has sublinear correction in the transition band.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .dynamics import VectorField
from .errors import DimensionMismatchError, MissingDecompositionError, RhoTooSmallError

__all__ = [
    "CoupledSystem", "DecompositionData", "CutoffProfile", "DecompositionReport",
    "assemble_field", "validate_decomposition", "build_cutoff", "modify_system",
    "CutoffModification", "validate_periodicity", "gamma_least_squares",
]

_J = np.array([[0.0, -1.0], [1.0, 0.0]])


@dataclass(frozen=True)
class DecompositionData:
    """Structural data of the convex-combination decomposition of F.

    ``mode`` is "global" (one gamma on all of R^2) or "quadrant" (a separate
    gamma on each open quadrant).  ``grad_Q`` must be uniformly bounded by
    ``C_tilde``.
    """

    H1: object
    H2: object
    grad_Q: callable
    mode: str = "global"
    C_tilde: float | None = None
    Q_value: callable = None

    def __post_init__(self):
        if self.mode not in ("global", "quadrant"):
            raise ValueError(f"unknown decomposition mode {self.mode!r}")


@dataclass(frozen=True)
class CoupledSystem:
    """Coupled system in periodic (period T) or Neumann (interval [a,b]) mode.

    ``grad_H(t, x, y) -> (dx array, dy array)`` and
    ``grad_P(t, x, y, w) -> (dx, dy, dw)`` may be None for absent blocks.
    ``w_kink`` marks a planar field with a gradient kink across u = 0
    (asymmetric stiffness); flows then split steps at u-axis crossings.
    """

    M: int
    F: callable
    grad_H: callable = None
    grad_P: callable = None
    T: float = None
    interval: tuple = None
    decomposition: DecompositionData = None
    H_value: callable = None
    P_value: callable = None
    w_kink: bool = False
    label: str = ""

    def __post_init__(self):
        if (self.T is None) == (self.interval is None):
            raise ValueError("exactly one of T (periodic) or interval (Neumann) is required")
        if self.M < 0:
            raise ValueError("M must be >= 0")

    @property
    def mode(self):
        return "periodic" if self.T is not None else "neumann"

    @property
    def dim(self):
        return 2 * self.M + 2

    @property
    def span(self):
        return self.T if self.T is not None else self.interval[1] - self.interval[0]

    @property
    def t0(self):
        return 0.0 if self.T is not None else self.interval[0]

    def split(self, z):
        M = self.M
        return z[:M], z[M:2 * M], z[2 * M:2 * M + 2]


def assemble_field(sys):
    """Assembled vector field of the coupled system.

    w' solves J w' = F + grad_w P, i.e. w' = (-J)(F + grad_w P).
    """
    M = sys.M
    dim = sys.dim
    grad_H = sys.grad_H
    grad_P = sys.grad_P
    F = sys.F

    def f(t, z):
        if z.shape[-1] != dim:
            raise DimensionMismatchError(f"state has size {z.shape[-1]}, expected {dim}")
        x, y, w = z[:M], z[M:2 * M], z[2 * M:]
        out = np.empty(dim)
        rhs_w = np.asarray(F(t, w), dtype=float)
        if grad_H is not None:
            hx, hy = grad_H(t, x, y)
            out[:M] = hy
            out[M:2 * M] = -np.asarray(hx)
        else:
            out[:2 * M] = 0.0
        if grad_P is not None:
            px, py, pw = grad_P(t, x, y, w)
            out[:M] += np.asarray(py)
            out[M:2 * M] -= np.asarray(px)
            rhs_w = rhs_w + np.asarray(pw)
        # (-J) @ rhs_w
        out[2 * M] = rhs_w[1]
        out[2 * M + 1] = -rhs_w[0]
        return out

    return VectorField(dim, f)


def field_switches(sys):
    """Step-splitting switch functions for the assembled field."""
    if sys.w_kink:
        iu = 2 * sys.M
        return ((lambda z: z[iu]),)
    return ()


# --------------------------------------------------------------------------
# decomposition validation
# --------------------------------------------------------------------------

def gamma_least_squares(Fv, g1, g2, gQ):
    """Per-point least-squares gamma for F - gradQ = (1-g) gradH1 + g gradH2.

    Arrays have shape (2,) or (2, n).  Where grad H2 == grad H1 the direction
    degenerates and gamma defaults to 1/2 (its value is irrelevant there).
    Returns (gamma, residual norm).
    """
    d = np.asarray(g2) - np.asarray(g1)
    r = np.asarray(Fv) - np.asarray(gQ) - np.asarray(g1)
    dd = np.sum(d * d, axis=0)
    rd = np.sum(r * d, axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        gamma = np.where(dd > 0.0, rd / np.where(dd > 0.0, dd, 1.0), 0.5)
    resid = r - gamma * d
    return gamma, np.sqrt(np.sum(resid * resid, axis=0))


@dataclass(frozen=True)
class DecompositionReport:
    max_residual: float
    gamma_min: float
    gamma_max: float
    range_violations: int
    gamma_samples: np.ndarray  # rows (t, u, v, gamma, residual)
    tol: float

    @property
    def passed(self):
        return self.max_residual <= self.tol and self.range_violations == 0


def validate_decomposition(sys, n_samples=256, tol=1e-9, seed=0, radius_range=(0.1, 50.0)):
    """Sample the convex-combination structure of F against the declared data.

    For each sampled (t, w) the scalar least-squares gamma* is computed; the
    report records the worst residual and whether gamma* stays in
    [-tol, 1+tol].  In quadrant mode samples avoid the axes (the open
    quadrants are the decomposition's domain).
    """
    dec = sys.decomposition
    if dec is None:
        raise MissingDecompositionError("system has no DecompositionData")
    rng = np.random.default_rng(seed)
    span = sys.span
    t0 = sys.t0
    ts = t0 + rng.uniform(0.0, 1.0, n_samples) * span
    ang = rng.uniform(0.0, 2 * np.pi, n_samples)
    if dec.mode == "quadrant":
        # keep a safe sector away from both axes
        quadrant = rng.integers(0, 4, n_samples)
        ang = quadrant * (np.pi / 2) + rng.uniform(0.05, np.pi / 2 - 0.05, n_samples)
    rad = np.exp(rng.uniform(np.log(radius_range[0]), np.log(radius_range[1]), n_samples))
    w = np.stack([rad * np.cos(ang), rad * np.sin(ang)])

    Fv = np.stack([np.asarray(sys.F(t, w[:, k]), dtype=float) for k, t in enumerate(ts)], axis=1)
    gQ = np.stack([np.asarray(dec.grad_Q(t, w[:, k]), dtype=float) for k, t in enumerate(ts)],
                  axis=1)
    g1 = np.asarray(dec.H1.grad(w), dtype=float)
    g2 = np.asarray(dec.H2.grad(w), dtype=float)

    gamma, resid = gamma_least_squares(Fv, g1, g2, gQ)
    violations = int(np.count_nonzero((gamma < -tol) | (gamma > 1.0 + tol)))
    samples = np.column_stack([ts, w[0], w[1], gamma, resid])
    return DecompositionReport(
        max_residual=float(np.max(resid)),
        gamma_min=float(np.min(gamma)),
        gamma_max=float(np.max(gamma)),
        range_violations=violations,
        gamma_samples=samples,
        tol=tol,
    )


# --------------------------------------------------------------------------
# cutoff profile
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class CutoffProfile:
    """C^1 profile with eta = 1 on (-inf, rho], eta = 0 on [rho^3, inf).

    Built in sigma = ln ln xi coordinates, where the admissible slope is
    |d eta/d sigma| <= 1 and the total drop of 1 happens over length ln 3.
    The profile declines at the constant rate ``kappa`` < 1 between two
    smoothstep ramps occupying 1% relative margins at both ends, so the
    derivative bound -1/(xi ln xi) <= eta' <= 0 holds with strictly positive
    margin while the boundary values stay exact.
    """

    rho: float
    kappa: float
    sigma0: float
    m1: float
    m2: float

    @property
    def length(self):
        return np.log(3.0)

    def _ramp_area(self, u):
        # integral of smoothstep 3u^2-2u^3 from 0 to u
        return u ** 3 - 0.5 * u ** 4

    def _weight(self, sigma):
        s = sigma - self.sigma0
        L = self.length
        up = np.clip(s / self.m1, 0.0, 1.0)
        down = np.clip((L - s) / self.m2, 0.0, 1.0)
        return (3 * up ** 2 - 2 * up ** 3) * (3 * down ** 2 - 2 * down ** 3)

    def _area(self, sigma):
        # integral of the weight from sigma0 to sigma (ramps never overlap)
        s = sigma - self.sigma0
        L = self.length
        s = np.clip(s, 0.0, L)
        up = np.clip(s / self.m1, 0.0, 1.0)
        a = self.m1 * self._ramp_area(up)
        a = a + np.clip(s - self.m1, 0.0, L - self.m1 - self.m2)
        vd = np.clip((L - s) / self.m2, 0.0, 1.0)
        a = a + self.m2 * (self._ramp_area(1.0) - self._ramp_area(vd))
        return a

    def eta(self, xi):
        xi = np.asarray(xi, dtype=float)
        scalar = xi.ndim == 0
        xi = np.atleast_1d(xi)
        out = np.empty_like(xi)
        lo = xi <= self.rho
        hi = xi >= self.rho ** 3
        mid = ~(lo | hi)
        out[lo] = 1.0
        out[hi] = 0.0
        if np.any(mid):
            sigma = np.log(np.log(xi[mid]))
            out[mid] = 1.0 - self.kappa * self._area(sigma)
        return float(out[0]) if scalar else out

    def eta_prime(self, xi):
        xi = np.asarray(xi, dtype=float)
        scalar = xi.ndim == 0
        xi = np.atleast_1d(xi)
        out = np.zeros_like(xi)
        mid = (xi > self.rho) & (xi < self.rho ** 3)
        if np.any(mid):
            x = xi[mid]
            sigma = np.log(np.log(x))
            out[mid] = -self.kappa * self._weight(sigma) / (x * np.log(x))
        return float(out[0]) if scalar else out


def build_cutoff(rho, margin=0.01):
    """Cutoff profile for the large-amplitude modification.

    Requires rho > e so that ln ln is defined on [rho, rho^3] and the budget
    inequality  integral_rho^{rho^3} dxi/(xi ln xi) = ln 3 > 1  leaves room
    for a constant decline rate below the admissible slope.
    """
    if not rho > np.e:
        raise RhoTooSmallError(f"rho must exceed e = {np.e:.6f}, got {rho}")
    sigma0 = np.log(np.log(rho))
    L = np.log(3.0)
    # sigma-widths of the relative margins [rho, (1+margin) rho] and
    # [rho^3/(1+margin), rho^3]
    m1 = np.log(np.log((1.0 + margin) * rho)) - sigma0
    m2 = np.log(np.log(rho ** 3)) - np.log(np.log(rho ** 3 / (1.0 + margin)))
    if m1 + m2 >= L:
        raise RhoTooSmallError("cutoff margins overlap; decrease margin")
    kappa = 1.0 / (L - 0.5 * (m1 + m2))
    if kappa >= 1.0:
        raise RhoTooSmallError(
            f"decline rate {kappa:.6f} >= 1 violates the derivative bound; decrease margin")
    return CutoffProfile(rho=float(rho), kappa=float(kappa), sigma0=float(sigma0),
                         m1=float(m1), m2=float(m2))


# --------------------------------------------------------------------------
# modified system
# --------------------------------------------------------------------------

class CutoffModification:
    """Field and potential of the modified system, kept for diagnostics.

    Outside |w| = rho the planar potential is interpolated between the
    reconstructed Phi(t,w) = (1-gamma) H1 + gamma H2 (gamma by pointwise
    least squares, clamped to [0,1]) and the average (H1+H2)/2; the gradient
    picks up the radial correction eta'(|w|) (Phi - avg) w/|w| in the band.
    """

    def __init__(self, sys, rho):
        dec = sys.decomposition
        if dec is None:
            raise MissingDecompositionError("modify_system needs DecompositionData")
        self.sys = sys
        self.profile = build_cutoff(rho)
        self.rho = float(rho)
        self.dec = dec

    def _gamma_hat(self, t, w):
        dec = self.dec
        Fv = np.asarray(self.sys.F(t, w), dtype=float)
        gQ = np.asarray(dec.grad_Q(t, w), dtype=float)
        g1 = np.asarray(dec.H1.grad(w), dtype=float)
        g2 = np.asarray(dec.H2.grad(w), dtype=float)
        gamma, _ = gamma_least_squares(Fv, g1, g2, gQ)
        return np.clip(gamma, 0.0, 1.0), Fv, gQ, g1, g2

    def phi(self, t, w):
        """Interpolated planar potential Phi_rho(t, w)."""
        w = np.asarray(w, dtype=float)
        r = float(np.hypot(w[0], w[1]))
        dec = self.dec
        h1 = float(dec.H1.value(w))
        h2 = float(dec.H2.value(w))
        avg = 0.5 * (h1 + h2)
        if r >= self.rho ** 3:
            return avg
        gamma, _, _, _, _ = self._gamma_hat(t, w)
        phi_val = (1.0 - float(gamma)) * h1 + float(gamma) * h2
        if r <= self.rho:
            return phi_val
        eta = self.profile.eta(r)
        return eta * phi_val + (1.0 - eta) * avg

    def F_rho(self, t, w):
        w = np.asarray(w, dtype=float)
        r = float(np.hypot(w[0], w[1]))
        if r <= self.rho:
            return np.asarray(self.sys.F(t, w), dtype=float)
        dec = self.dec
        g1 = np.asarray(dec.H1.grad(w), dtype=float)
        g2 = np.asarray(dec.H2.grad(w), dtype=float)
        gQ = np.asarray(dec.grad_Q(t, w), dtype=float)
        avg_grad = 0.5 * (g1 + g2)
        if r >= self.rho ** 3:
            return avg_grad + gQ
        gamma, Fv, gQ, g1, g2 = self._gamma_hat(t, w)
        eta = self.profile.eta(r)
        etap = self.profile.eta_prime(r)
        h1 = float(dec.H1.value(w))
        h2 = float(dec.H2.value(w))
        phi_val = (1.0 - float(gamma)) * h1 + float(gamma) * h2
        avg = 0.5 * (h1 + h2)
        grad_phi = Fv - gQ  # the declared structure's gradient part
        radial = etap * (phi_val - avg) / r * w
        return eta * grad_phi + (1.0 - eta) * avg_grad + radial + gQ

    def system(self):
        return replace(self.sys, F=self.F_rho,
                       label=(self.sys.label + f" [cutoff rho={self.rho:g}]").strip())


def modify_system(sys, rho):
    """System with F replaced by the cutoff-modified field F_rho.

    Identical to ``sys`` for |w| <= rho; equal to the averaged homogeneous
    field plus grad Q for |w| >= rho^3.
    """
    return CutoffModification(sys, rho).system()


# --------------------------------------------------------------------------
# periodicity certificates
# --------------------------------------------------------------------------

def _halton(n, dim, seed=0):
    from scipy.stats import qmc
    return qmc.Halton(d=dim, scramble=True, seed=seed).random(n)


@dataclass(frozen=True)
class PeriodicityReport:
    max_t_residual: float
    max_x_residual: float
    tol: float

    @property
    def passed(self):
        return self.max_t_residual <= self.tol and self.max_x_residual <= self.tol


def validate_periodicity(sys, n_samples=32, tol=1e-8, seed=0, scale=3.0):
    """Sample-based certificate of T-periodicity in t and 2pi-periodicity in x.

    Compares the assembled field at (t, z) with (t+T, z) and with x shifted by
    2pi in each coordinate.  A certificate, not a proof.
    """
    if sys.mode != "periodic":
        raise ValueError("periodicity validation applies to periodic mode")
    f = assemble_field(sys)
    M, dim = sys.M, sys.dim
    pts = _halton(n_samples, dim + 1, seed)
    t_res = 0.0
    x_res = 0.0
    for row in pts:
        t = row[0] * sys.T
        z = scale * (2.0 * row[1:] - 1.0)
        base = f(t, z)
        t_res = max(t_res, float(np.max(np.abs(f(t + sys.T, z) - base))))
        for i in range(M):
            z2 = z.copy()
            z2[i] += 2 * np.pi
            x_res = max(x_res, float(np.max(np.abs(f(t, z2) - base))))
    return PeriodicityReport(t_res, x_res, tol)
