"""Shooting solvers for T-periodic and Neumann-type solutions.

Periodic mode roots R(z0) = wrap(Phi_T(z0) - z0), where the angular (x)
components of the difference are wrapped to (-pi, pi]; the Newton map then
lives on the cylinder, so solutions whose x drifts by multiples of 2pi over a
period count as periodic.  Neumann mode shoots from (x_a, 0, u_a, 0) and
roots the boundary residual (y(b), v(b)).

Damped Newton with Armijo backtracking; a Jacobian with condition number
beyond 1e12 switches the step to Levenberg-Marquardt with fixed damping
1e-6.  Singular Jacobians are expected at resonance (continua of solutions):
the LM step then returns a point on the continuum instead of failing.

Solutions are geometrically distinct when they are not related by shifting
some x_i by an integer multiple of 2pi; records are compared at the initial
time, which identifies orbits provided the right-hand side is locally
Lipschitz (uniqueness of the IVP).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .dynamics import integrate, winding
from .errors import (IntegrationError, MaxIterationsError, OriginTooCloseError,
                     SingularJacobianError)
from .systems import assemble_field, field_switches

__all__ = [
    "PeriodicSolutionRecord", "NeumannSolutionRecord", "DistinctnessPartition",
    "MultistartSpec", "NeumannStartSpec", "MultistartResult",
    "shoot_periodic", "multistart_periodic", "classify_distinct",
    "shoot_neumann", "multistart_neumann", "classify_distinct_neumann",
    "wrap_angle_diff",
]

_COND_LIMIT = 1e12
_LM_DAMPING = 1e-6
_ARMIJO_C = 1e-4
_MAX_BACKTRACKS = 30
_WINDING_MIN_RADIUS = 1e-8


def wrap_angle_diff(d):
    """Wrap angle differences into (-pi, pi] componentwise."""
    r = np.mod(np.asarray(d, dtype=float), 2 * np.pi)
    return np.where(r > np.pi, r - 2 * np.pi, r)


@dataclass(frozen=True)
class PeriodicSolutionRecord:
    z0: np.ndarray
    residual: float
    iterations: int
    turns: int | None          # clockwise turns of w over [0, T]; None if w nears 0
    x0_normalized: np.ndarray  # x(0) wrapped to [0, 2pi)
    M: int

    @property
    def y0(self):
        return self.z0[self.M:2 * self.M]

    @property
    def w0(self):
        return self.z0[2 * self.M:]


@dataclass(frozen=True)
class NeumannSolutionRecord:
    x_a: np.ndarray
    u_a: float
    residual: float
    iterations: int
    z0: np.ndarray             # full state (x_a, 0, u_a, 0)
    x_a_normalized: np.ndarray


@dataclass(frozen=True)
class DistinctnessPartition:
    labels: np.ndarray         # class index per input record
    classes: tuple             # tuple of tuples of record indices
    representatives: tuple     # one record per class (smallest residual)

    @property
    def n_classes(self):
        return len(self.classes)


# --------------------------------------------------------------------------
# Newton core
# --------------------------------------------------------------------------

def _lm_step(J, R):
    """Levenberg-Marquardt step with Marquardt-scaled fixed damping 1e-6.

    The damping multiplies diag(J^T J) so it stays proportionate to the
    local curvature; a tiny floor keeps the system solvable when columns
    vanish (neutral directions on a solution continuum get a zero step).
    """
    JtJ = J.T @ J
    d = np.diag(JtJ)
    floor = 1e-16 * max(1.0, float(np.max(d, initial=0.0)))
    A = JtJ + np.diag(_LM_DAMPING * np.maximum(d, floor))
    return np.linalg.solve(A, -J.T @ R)


def _line_search(residual_fn, z, delta, R, nR):
    alpha = 1.0
    for _ in range(_MAX_BACKTRACKS):
        z_try = z + alpha * delta
        R_try = residual_fn(z_try)
        n_try = float(np.linalg.norm(R_try))
        if n_try <= (1.0 - _ARMIJO_C * alpha) * nR:
            return z_try, R_try, n_try
        alpha *= 0.5
    return None


def _newton(residual_fn, jacobian_fn, z0, tol, max_iter):
    """Damped Newton with LM fallback; returns (z, |R|, iterations)."""
    z = np.asarray(z0, dtype=float).copy()
    R = residual_fn(z)
    nR = float(np.linalg.norm(R))
    for it in range(max_iter):
        if nR <= tol:
            return z, nR, it
        J = jacobian_fn(z)
        use_lm = False
        delta = None
        cond = np.linalg.cond(J)
        if not np.isfinite(cond) or cond > _COND_LIMIT:
            use_lm = True
        else:
            try:
                delta = np.linalg.solve(J, -R)
            except np.linalg.LinAlgError:
                use_lm = True
        if use_lm:
            delta = _lm_step(J, R)

        step = _line_search(residual_fn, z, delta, R, nR)
        if step is None and not use_lm:
            # stalled Newton direction: retry the same iteration with LM
            use_lm = True
            step = _line_search(residual_fn, z, _lm_step(J, R), R, nR)
        if step is None:
            if use_lm:
                raise SingularJacobianError(
                    f"LM fallback stalled at residual {nR:.3e} (cond ~ {cond:.3e})")
            raise MaxIterationsError(f"line search stalled at residual {nR:.3e}")
        z, R, nR = step
    if nR <= tol:
        return z, nR, max_iter
    raise MaxIterationsError(f"no convergence in {max_iter} iterations; residual {nR:.3e}")


# --------------------------------------------------------------------------
# periodic shooting
# --------------------------------------------------------------------------

def _periodic_residual_fn(sys, field, switches, tol):
    M = sys.M

    def residual(z):
        zT = _flow(field, z, sys.T, tol, switches)
        d = zT - z
        d[:M] = wrap_angle_diff(d[:M])
        return d

    return residual


def _flow(field, z, T, tol, switches):
    traj = integrate(field, z, 0.0, T, tol, dense=False, switches=switches)
    return traj.ys[-1]


def shoot_periodic(sys, z_guess, newton_tol=1e-9, max_iter=40,
                   integration_tol=None, jac_tol=None, fd_step=1e-6):
    """Newton shooting for a T-periodic solution from ``z_guess``.

    Returns a :class:`PeriodicSolutionRecord`; raises a
    :class:`ShootingError` subclass on failure.
    """
    if sys.mode != "periodic":
        raise ValueError("shoot_periodic requires a periodic-mode system")
    if integration_tol is None:
        integration_tol = 0.1 * newton_tol
    if jac_tol is None:
        jac_tol = max(1e-8, 10.0 * integration_tol)
    field = assemble_field(sys)
    switches = field_switches(sys)
    residual_fn = _periodic_residual_fn(sys, field, switches, integration_tol)
    n = sys.dim

    def jacobian_fn(z):
        J = np.empty((n, n))
        for j in range(n):
            d = fd_step * (1.0 + abs(z[j]))
            zp = z.copy()
            zp[j] += d
            zm = z.copy()
            zm[j] -= d
            J[:, j] = (_flow(field, zp, sys.T, jac_tol, switches)
                       - _flow(field, zm, sys.T, jac_tol, switches)) / (2 * d)
        return J - np.eye(n)

    z, res, iters = _newton(residual_fn, jacobian_fn, np.asarray(z_guess, float),
                            newton_tol, max_iter)
    return _make_periodic_record(sys, field, switches, z, res, iters, integration_tol)


def _make_periodic_record(sys, field, switches, z, res, iters, tol):
    M = sys.M
    turns = None
    traj = integrate(field, z, 0.0, sys.T, tol, switches=switches)
    try:
        rep = winding(traj, (2 * M, 2 * M + 1), _WINDING_MIN_RADIUS)
        turns = rep.turns
    except OriginTooCloseError:
        turns = None
    return PeriodicSolutionRecord(
        z0=z, residual=res, iterations=iters, turns=turns,
        x0_normalized=np.mod(z[:M], 2 * np.pi), M=M)


# --------------------------------------------------------------------------
# distinctness
# --------------------------------------------------------------------------

def _union_find_partition(n, same):
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            ri, rj = find(i), find(j)
            if ri != rj and same(i, j):
                parent[max(ri, rj)] = min(ri, rj)

    labels = np.empty(n, dtype=int)
    roots = {}
    for i in range(n):
        r = find(i)
        if r not in roots:
            roots[r] = len(roots)
        labels[i] = roots[r]
    classes = tuple(tuple(np.nonzero(labels == c)[0]) for c in range(len(roots)))
    return labels, classes


def classify_distinct(records, tol=1e-6):
    """Partition periodic records into geometrically distinct classes.

    Two records coincide when their y(0) and w(0) agree within ``tol`` and
    every x_i(0) agrees modulo 2pi within ``tol``.  Union-find makes the
    relation a true equivalence regardless of input order.
    """
    records = list(records)
    n = len(records)

    def same(i, j):
        a, b = records[i], records[j]
        if np.max(np.abs(a.y0 - b.y0), initial=0.0) > tol:
            return False
        if np.max(np.abs(a.w0 - b.w0)) > tol:
            return False
        dx = wrap_angle_diff(a.z0[:a.M] - b.z0[:b.M])
        return np.max(np.abs(dx), initial=0.0) <= tol

    labels, classes = _union_find_partition(n, same)
    reps = tuple(min((records[i] for i in cls), key=lambda r: (r.residual, _canon_key(r)))
                 for cls in classes)
    return DistinctnessPartition(labels=labels, classes=classes, representatives=reps)


def _canon_key(rec):
    return tuple(np.round(np.concatenate([rec.x0_normalized, rec.z0[rec.M:]]), 9))


def classify_distinct_neumann(records, tol=1e-6):
    """Neumann distinctness: x_a modulo 2pi, u_a compared directly."""
    records = list(records)
    n = len(records)

    def same(i, j):
        a, b = records[i], records[j]
        if abs(a.u_a - b.u_a) > tol:
            return False
        dx = wrap_angle_diff(a.x_a - b.x_a)
        return np.max(np.abs(dx), initial=0.0) <= tol

    labels, classes = _union_find_partition(n, same)
    reps = tuple(min((records[i] for i in cls),
                     key=lambda r: (r.residual, tuple(np.round(r.x_a_normalized, 9)), round(r.u_a, 9)))
                 for cls in classes)
    return DistinctnessPartition(labels=labels, classes=classes, representatives=reps)


# --------------------------------------------------------------------------
# multistart
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class MultistartSpec:
    """Grid of shooting starts: x over [0,2pi)^M, y over a rectangle, w polar."""

    x_points: int = 4
    y_ranges: tuple = ((-1.0, 1.0),)
    y_points: int = 3
    w_radii: tuple = (0.25,)
    w_angles: int = 4
    budget: int = 2000
    jitter: float = 0.0

    def starts(self, M, seed=0):
        if len(self.y_ranges) not in (1, M) and M > 0:
            raise ValueError("y_ranges must have length 1 (shared) or M")
        rng = np.random.default_rng(seed)
        xs = np.linspace(0.0, 2 * np.pi, self.x_points, endpoint=False) if M else [()]
        y_axes = []
        for i in range(M):
            lo, hi = self.y_ranges[i] if len(self.y_ranges) == M else self.y_ranges[0]
            y_axes.append(np.array([0.5 * (lo + hi)]) if self.y_points == 1
                          else np.linspace(lo, hi, self.y_points))
        ws = []
        for r in self.w_radii:
            if r == 0.0:
                ws.append(np.zeros(2))
                continue
            for k in range(self.w_angles):
                a = 2 * np.pi * k / self.w_angles
                ws.append(np.array([r * np.cos(a), r * np.sin(a)]))
        if not ws:
            ws = [np.zeros(2)]

        x_grid = itertools.product(*([xs] * M)) if M else [()]
        combos = itertools.product(x_grid, itertools.product(*y_axes) if M else [()], ws)
        count = 0
        for xg, yg, w in combos:
            if count >= self.budget:
                break
            z = np.concatenate([np.array(xg, dtype=float), np.array(yg, dtype=float), w])
            if self.jitter > 0.0:
                z = z + self.jitter * rng.standard_normal(z.size)
            count += 1
            yield z


@dataclass(frozen=True)
class NeumannStartSpec:
    """Grid of Neumann starts: x_a over [0,2pi)^M, u_a over a range."""

    x_points: int = 4
    u_range: tuple = (-1.0, 1.0)
    u_points: int = 5
    budget: int = 2000
    jitter: float = 0.0

    def starts(self, M, seed=0):
        rng = np.random.default_rng(seed)
        xs = np.linspace(0.0, 2 * np.pi, self.x_points, endpoint=False) if M else [()]
        us = np.linspace(self.u_range[0], self.u_range[1], self.u_points)
        combos = itertools.product(
            itertools.product(*([xs] * M)) if M else [()], us)
        count = 0
        for xg, u in combos:
            if count >= self.budget:
                break
            xa = np.array(xg, dtype=float)
            ua = float(u)
            if self.jitter > 0.0:
                xa = xa + self.jitter * rng.standard_normal(M)
                ua += self.jitter * rng.standard_normal()
            count += 1
            yield xa, ua


@dataclass(frozen=True)
class MultistartResult:
    records: tuple             # one representative per distinct class
    partition: DistinctnessPartition
    all_records: tuple
    stats: dict


def _dedup_tol(records, base=1e-6):
    scale = max((float(np.max(np.abs(r.z0))) for r in records), default=0.0)
    return base * (1.0 + scale)


def multistart_periodic(sys, spec=None, newton_tol=1e-9, max_iter=40, seed=0, **kw):
    """Run :func:`shoot_periodic` from every grid start and deduplicate.

    Failures are dropped and counted in ``stats``; successes are partitioned
    into geometrically distinct classes (canonical order for determinism).
    """
    spec = spec or MultistartSpec()
    successes = []
    stats = {"attempted": 0, "converged": 0, "max_iterations": 0,
             "singular_stall": 0, "integration_failure": 0}
    for z0 in spec.starts(sys.M, seed=seed):
        stats["attempted"] += 1
        try:
            rec = shoot_periodic(sys, z0, newton_tol=newton_tol, max_iter=max_iter, **kw)
            successes.append(rec)
            stats["converged"] += 1
        except SingularJacobianError:
            stats["singular_stall"] += 1
        except MaxIterationsError:
            stats["max_iterations"] += 1
        except IntegrationError:
            stats["integration_failure"] += 1
    successes.sort(key=_canon_key)
    partition = classify_distinct(successes, tol=_dedup_tol(successes))
    return MultistartResult(records=partition.representatives, partition=partition,
                            all_records=tuple(successes), stats=stats)


# --------------------------------------------------------------------------
# Neumann shooting
# --------------------------------------------------------------------------

def _neumann_state(sys, x_a, u_a):
    M = sys.M
    z = np.zeros(sys.dim)
    z[:M] = x_a
    z[2 * M] = u_a
    return z


def _neumann_residual(sys, field, switches, tol, x_a, u_a):
    a, b = sys.interval
    z = _neumann_state(sys, x_a, u_a)
    traj = integrate(field, z, a, b, tol, dense=False, switches=switches)
    zb = traj.ys[-1]
    M = sys.M
    return np.concatenate([zb[M:2 * M], [zb[2 * M + 1]]])  # (y(b), v(b))


def shoot_neumann(sys, guess, newton_tol=1e-9, max_iter=40,
                  integration_tol=None, jac_tol=None, fd_step=1e-6):
    """Newton shooting for the Neumann problem from guess (x_a, u_a).

    The initial state is (x_a, 0, u_a, 0) by construction; the residual is
    (y(b), v(b)) over the free unknowns in R^{M+1}.
    """
    if sys.mode != "neumann":
        raise ValueError("shoot_neumann requires a Neumann-mode system")
    if integration_tol is None:
        integration_tol = 0.1 * newton_tol
    if jac_tol is None:
        jac_tol = max(1e-8, 10.0 * integration_tol)
    field = assemble_field(sys)
    switches = field_switches(sys)
    M = sys.M
    x_a0, u_a0 = guess
    p0 = np.concatenate([np.asarray(x_a0, dtype=float).ravel(), [float(u_a0)]])

    def residual_fn(p):
        return _neumann_residual(sys, field, switches, integration_tol, p[:M], p[M])

    def jacobian_fn(p):
        n = M + 1
        J = np.empty((n, n))
        for j in range(n):
            d = fd_step * (1.0 + abs(p[j]))
            pp = p.copy()
            pp[j] += d
            pm = p.copy()
            pm[j] -= d
            J[:, j] = (_neumann_residual(sys, field, switches, jac_tol, pp[:M], pp[M])
                       - _neumann_residual(sys, field, switches, jac_tol, pm[:M], pm[M])) / (2 * d)
        return J

    p, res, iters = _newton(residual_fn, jacobian_fn, p0, newton_tol, max_iter)
    x_a = p[:M]
    u_a = float(p[M])
    return NeumannSolutionRecord(
        x_a=x_a, u_a=u_a, residual=res, iterations=iters,
        z0=_neumann_state(sys, x_a, u_a), x_a_normalized=np.mod(x_a, 2 * np.pi))


def multistart_neumann(sys, spec=None, newton_tol=1e-9, max_iter=40, seed=0, **kw):
    """Run :func:`shoot_neumann` from every grid start and deduplicate."""
    spec = spec or NeumannStartSpec()
    successes = []
    stats = {"attempted": 0, "converged": 0, "max_iterations": 0,
             "singular_stall": 0, "integration_failure": 0}
    for x_a, u_a in spec.starts(sys.M, seed=seed):
        stats["attempted"] += 1
        try:
            rec = shoot_neumann(sys, (x_a, u_a), newton_tol=newton_tol,
                                max_iter=max_iter, **kw)
            successes.append(rec)
            stats["converged"] += 1
        except SingularJacobianError:
            stats["singular_stall"] += 1
        except MaxIterationsError:
            stats["max_iterations"] += 1
        except IntegrationError:
            stats["integration_failure"] += 1
    successes.sort(key=lambda r: (tuple(np.round(r.x_a_normalized, 9)), round(r.u_a, 9)))
    partition = classify_distinct_neumann(
        successes, tol=_dedup_tol(successes) if successes else 1e-6)
    return MultistartResult(records=partition.representatives, partition=partition,
                            all_records=tuple(successes), stats=stats)


def revalidate(sys, record, integration_tol=1e-12):
    """Residual re-computed by an independent integration at ``integration_tol``."""
    field = assemble_field(sys)
    switches = field_switches(sys)
    if sys.mode == "periodic":
        zT = _flow(field, record.z0, sys.T, integration_tol, switches)
        d = zT - record.z0
        d[:sys.M] = wrap_angle_diff(d[:sys.M])
        return float(np.linalg.norm(d))
    return float(np.linalg.norm(
        _neumann_residual(sys, field, switches, integration_tol, record.x_a, record.u_a)))
