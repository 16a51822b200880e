"""Ready-made building blocks for the coupled-system examples.

The pendulum-type block and the asymmetric-oscillator planar block cover the
showcase systems; expression-backed builders handle everything else.
Expression variables: the angular block uses (t, x1..xM, y1..yM), planar
expressions use (t, u, v); for M = 1 the aliases x, y are accepted.
"""

from __future__ import annotations

import numpy as np

from . import expr as xp
from .errors import ValidationError
from .homogeneous import asymmetric, hamiltonian_from_expr
from .systems import DecompositionData

__all__ = [
    "pendulum_hamiltonian", "free_rotator", "hamiltonian_block_from_expr",
    "coupling_from_expr", "asymmetric_field", "planar_field_from_expr",
    "xy_names",
]


def xy_names(M):
    return [f"x{i + 1}" for i in range(M)], [f"y{i + 1}" for i in range(M)]


def _bind_xy(M, t, x, y, params):
    xn, yn = xy_names(M)
    b = {"t": t, **params}
    for i in range(M):
        b[xn[i]] = x[i]
        b[yn[i]] = y[i]
    return b


def _resolve_aliases(ast, M):
    # for M = 1 the short names x, y stand for x1, y1
    if M == 1:
        return xp.substitute(ast, {"x": "x1", "y": "y1"})
    return ast


def pendulum_hamiltonian(A=1.0, E_src="0", params=None):
    """Pendulum-type block: H(t, q, p) = p^2/2 + E(t) p - A cos q (M = 1).

    ``E_src`` is the T-periodic primitive of the forcing (E' = e), entering
    the equations as q' = p + E(t), p' = -A sin q.
    """
    params = dict(params or {})
    E_ast = xp.parse_expr(E_src) if isinstance(E_src, str) else E_src

    def E(t):
        return xp.eval_expr(E_ast, {"t": t, **params})

    def grad_H(t, x, y):
        return (np.array([A * np.sin(x[0])]), np.array([y[0] + E(t)]))

    def H_value(t, x, y):
        return 0.5 * y[0] ** 2 + E(t) * y[0] - A * np.cos(x[0])

    return grad_H, H_value


def free_rotator(M):
    """H = |y|^2 / 2: x drifts at rate y, y is conserved."""

    def grad_H(t, x, y):
        return (np.zeros(M), np.asarray(y, dtype=float).copy())

    def H_value(t, x, y):
        return 0.5 * float(np.dot(y, y))

    return grad_H, H_value


def hamiltonian_block_from_expr(src, M, params=None):
    """Angular block from an expression in (t, x1.., y1..)."""
    params = dict(params or {})
    ast = _resolve_aliases(xp.parse_expr(src) if isinstance(src, str) else src, M)
    xn, yn = xy_names(M)
    names = tuple(xn + yn)

    def grad_H(t, x, y):
        g = xp.grad_expr(ast, names, _bind_xy(M, t, x, y, params))
        return (np.asarray(g[:M], dtype=float), np.asarray(g[M:], dtype=float))

    def H_value(t, x, y):
        return xp.eval_expr(ast, _bind_xy(M, t, x, y, params))

    return grad_H, H_value


def coupling_from_expr(src, M, params=None):
    """Coupling block P from an expression in (t, x1.., y1.., u, v)."""
    params = dict(params or {})
    ast = _resolve_aliases(xp.parse_expr(src) if isinstance(src, str) else src, M)
    xn, yn = xy_names(M)
    names = tuple(xn + yn + ["u", "v"])

    def binding(t, x, y, w):
        b = _bind_xy(M, t, x, y, params)
        b["u"] = w[0]
        b["v"] = w[1]
        return b

    def grad_P(t, x, y, w):
        g = xp.grad_expr(ast, names, binding(t, x, y, w))
        return (np.asarray(g[:M], dtype=float),
                np.asarray(g[M:2 * M], dtype=float),
                np.asarray(g[2 * M:], dtype=float))

    def P_value(t, x, y, w):
        return xp.eval_expr(ast, binding(t, x, y, w))

    return grad_P, P_value


def asymmetric_field(mu1, nu1, mu2=None, nu2=None, h_src="0", params=None):
    """Planar block of the asymmetric oscillator u'' + f(u) + h(t, u) = 0.

    The restoring force interpolates between the stiffness pairs,

        f(u) = ((mu1+mu2)/2 + (mu2-mu1)/2 cos u) u+
             - ((nu1+nu2)/2 + (nu2-nu1)/2 sin(u^3)) u-,

    so mu1 <= f(u)/u <= mu2 on u > 0 and nu1 <= -f(-u)/u <= nu2, and h is a
    bounded remainder.  Returns (F, DecompositionData, w_kink) with
    F(t, w) = (f(u) + h(t, u), v) and Q the primitive of h.
    """
    mu2 = mu1 if mu2 is None else mu2
    nu2 = nu1 if nu2 is None else nu2
    problems = [name for name, val in
                (("mu1", mu1), ("nu1", nu1), ("mu2", mu2), ("nu2", nu2)) if not val > 0]
    if problems:
        raise ValidationError([f"{p} must be positive" for p in problems])
    if mu2 < mu1 or nu2 < nu1:
        raise ValidationError(["stiffness ordering requires mu1 <= mu2 and nu1 <= nu2"])
    params = dict(params or {})
    h_ast = xp.parse_expr(h_src) if isinstance(h_src, str) else h_src

    def h(t, u):
        return xp.eval_expr(h_ast, {"t": t, "u": u, **params})

    def f(u):
        up = np.maximum(u, 0.0)
        um = np.maximum(-u, 0.0)
        z1 = 0.5 * (mu1 + mu2) + 0.5 * (mu2 - mu1) * np.cos(u)
        z2 = 0.5 * (nu1 + nu2) + 0.5 * (nu2 - nu1) * np.sin(u ** 3)
        return z1 * up - z2 * um

    def F(t, w):
        return np.stack([f(w[0]) + h(t, w[0]), np.asarray(w[1], dtype=float)])

    H1 = asymmetric(mu1, nu1)
    H2 = asymmetric(mu2, nu2)

    def grad_Q(t, w):
        hv = h(t, w[0])
        return np.stack([np.asarray(hv, dtype=float),
                         np.zeros_like(np.asarray(hv, dtype=float))])

    mode = "global" if (mu1 == mu2 and nu1 == nu2) else "quadrant"
    dec = DecompositionData(H1, H2, grad_Q, mode=mode)
    w_kink = (mu1 != nu1) or (mu2 != nu2)
    return F, dec, w_kink


def planar_field_from_expr(K_src=None, components=None, params=None,
                           H1_src=None, H2_src=None, Q_src=None):
    """Planar block from a Hamiltonian expression K(t, u, v) or components.

    With ``K_src`` the field is F = grad_w K (the natural gradient form);
    ``components`` gives (F_u_src, F_v_src) directly.  Optional H1/H2/Q
    expressions attach a decomposition.  Returns (F, dec_or_None, w_kink).
    """
    params = dict(params or {})
    if (K_src is None) == (components is None):
        raise ValidationError(["planar expr block needs exactly one of K or components"])
    if K_src is not None:
        ast = xp.parse_expr(K_src) if isinstance(K_src, str) else K_src
        kinky = xp.has_kinks(ast)

        def F(t, w):
            return xp.grad_expr(ast, ("u", "v"), {"t": t, "u": w[0], "v": w[1], **params})
    else:
        asts = [xp.parse_expr(c) if isinstance(c, str) else c for c in components]
        kinky = any(xp.has_kinks(a) for a in asts)

        def F(t, w):
            b = {"t": t, "u": w[0], "v": w[1], **params}
            return np.stack([np.asarray(xp.eval_expr(a, b), dtype=float) for a in asts])

    dec = None
    if H1_src is not None and H2_src is not None:
        H1 = hamiltonian_from_expr(H1_src, params=params)
        H2 = hamiltonian_from_expr(H2_src, params=params)
        Q_ast = xp.parse_expr(Q_src if Q_src is not None else "0")

        def grad_Q(t, w):
            return xp.grad_expr(Q_ast, ("u", "v"), {"t": t, "u": w[0], "v": w[1], **params})

        dec = DecompositionData(H1, H2, grad_Q)
        kinky = kinky or H1.kink_on_u_axis or H2.kink_on_u_axis
    return F, dec, kinky
