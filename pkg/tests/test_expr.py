import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hamshoot.errors import DomainError, ExprSyntaxError, UnboundVariableError
from hamshoot.expr import (eval_expr, free_variables, grad_expr, has_kinks,
                           parse_expr, unparse)

ASYM = "0.5*(mu*pos(u)^2 + nu*neg(u)^2 + v^2)"


def test_parse_asymmetric_hamiltonian():
    e = parse_expr(ASYM)
    assert eval_expr(e, {"mu": 1.0, "nu": 1.0, "u": 0.6, "v": 0.8}) == pytest.approx(0.5)


def test_identity_and_pos_neg():
    assert eval_expr(parse_expr("u"), {"u": 3.0}) == 3.0
    assert eval_expr(parse_expr("pos(u)-neg(u)"), {"u": -2.5}) == -2.5


def test_power_right_associative():
    assert eval_expr(parse_expr("2^3^2"), {}) == 512.0


def test_unary_minus_below_power():
    assert eval_expr(parse_expr("-2^2"), {}) == -4.0
    assert eval_expr(parse_expr("2^-2"), {}) == 0.25


def test_sin_at_zero():
    assert eval_expr(parse_expr("sin(t)"), {"t": 0.0}) == 0.0


def test_gradient_asymmetric_branches():
    e = parse_expr(ASYM)
    g = grad_expr(e, ("u", "v"), {"mu": 4.0, "nu": 1.0, "u": 1.0, "v": 1.0})
    assert np.allclose(g, [4.0, 1.0])
    g = grad_expr(e, ("u", "v"), {"mu": 4.0, "nu": 1.0, "u": -1.0, "v": 1.0})
    assert np.allclose(g, [-1.0, 1.0])


def test_euler_identity_on_homogeneous_expr():
    e = parse_expr(ASYM)
    rng = np.random.default_rng(0)
    for _ in range(50):
        u, v = rng.uniform(-3, 3, 2)
        b = {"mu": 4.0, "nu": 1.0, "u": u, "v": v}
        g = grad_expr(e, ("u", "v"), b)
        assert g @ np.array([u, v]) == pytest.approx(2 * eval_expr(e, b), abs=1e-12)


def test_kink_subgradient_is_zero():
    for src in ("pos(u)", "neg(u)", "abs(u)"):
        g = grad_expr(parse_expr(src), ("u",), {"u": 0.0})
        assert g[0] == 0.0


def test_unbound_variable():
    with pytest.raises(UnboundVariableError):
        eval_expr(parse_expr("a+b"), {"a": 1.0})


@pytest.mark.parametrize("src,binding", [
    ("ln(u)", {"u": -1.0}),
    ("ln(u)", {"u": 0.0}),
    ("sqrt(u)", {"u": -0.5}),
    ("1/u", {"u": 0.0}),
    ("u^0.5", {"u": -2.0}),
    ("0^u", {"u": -1.0}),
])
def test_domain_errors(src, binding):
    with pytest.raises(DomainError):
        eval_expr(parse_expr(src), binding)


def test_syntax_error_carries_offset():
    with pytest.raises(ExprSyntaxError) as ei:
        parse_expr("1 + * 2")
    assert ei.value.offset == 4
    with pytest.raises(ExprSyntaxError):
        parse_expr("sin(1, 2)")
    with pytest.raises(ExprSyntaxError):
        parse_expr("fancy(1)")
    with pytest.raises(ExprSyntaxError):
        parse_expr("2 x")  # no implicit multiplication


def test_array_evaluation_broadcasts():
    e = parse_expr(ASYM)
    u = np.array([1.0, -1.0, 0.5])
    v = np.ones(3)
    out = eval_expr(e, {"mu": 4.0, "nu": 1.0, "u": u, "v": v})
    assert out.shape == (3,)
    g = grad_expr(e, ("u", "v"), {"mu": 4.0, "nu": 1.0, "u": u, "v": v})
    assert g.shape == (2, 3)
    assert np.allclose(g[:, 0], [4.0, 1.0])
    assert np.allclose(g[:, 1], [-1.0, 1.0])


def test_passive_array_binding():
    g = grad_expr(parse_expr("sin(t)*u"), ("u",),
                  {"t": np.array([0.0, np.pi / 2]), "u": 2.0})
    assert np.allclose(g, [[0.0, 1.0]])


def test_has_kinks():
    assert has_kinks(parse_expr("pos(u)^2"))
    assert not has_kinks(parse_expr("sin(u)*exp(v)"))


# ---------------------------------------------------------------------------
# properties
# ---------------------------------------------------------------------------

_SMOOTH_FUNCS = ["sin", "cos", "exp", "atan"]


def _random_smooth_expr(rng, depth=0):
    """Random expression over smooth nodes only, safe to finite-difference."""
    r = rng.random()
    if depth >= 3 or r < 0.25:
        if rng.random() < 0.5:
            return f"{rng.uniform(0.2, 2.0):.6f}"
        return rng.choice(["a", "b", "c"])
    if r < 0.5:
        fn = rng.choice(_SMOOTH_FUNCS)
        return f"{fn}({_random_smooth_expr(rng, depth + 1)})"
    if r < 0.62:
        return f"({_random_smooth_expr(rng, depth + 1)})^{rng.integers(1, 4)}"
    op = rng.choice(["+", "-", "*"])
    return f"({_random_smooth_expr(rng, depth + 1)} {op} {_random_smooth_expr(rng, depth + 1)})"


def test_gradient_matches_central_differences():
    """100 random smooth expressions, relative agreement < 1e-6."""
    rng = np.random.default_rng(42)
    names = ("a", "b", "c")
    checked = 0
    while checked < 100:
        src = _random_smooth_expr(rng)
        e = parse_expr(src)
        vals = rng.uniform(-1.5, 1.5, 3)
        b = dict(zip(names, vals))
        g = grad_expr(e, names, b)
        h = 1e-6
        fd = np.empty(3)
        for i, nm in enumerate(names):
            bp = dict(b)
            bp[nm] = b[nm] + h
            bm = dict(b)
            bm[nm] = b[nm] - h
            fd[i] = (eval_expr(e, bp) - eval_expr(e, bm)) / (2 * h)
        scale = max(1.0, float(np.max(np.abs(g))))
        assert np.max(np.abs(g - fd)) / scale < 1e-6, src
        checked += 1


@given(st.floats(min_value=-1e6, max_value=1e6, allow_nan=False))
def test_pos_neg_identities(s):
    pos = eval_expr(parse_expr("pos(s)"), {"s": s})
    neg = eval_expr(parse_expr("neg(s)"), {"s": s})
    assert pos - neg == pytest.approx(s, rel=1e-15, abs=0.0)
    assert pos * neg == 0.0


@st.composite
def _expr_sources(draw, depth=0):
    if depth >= 3 or draw(st.booleans()):
        if draw(st.booleans()):
            return repr(draw(st.floats(min_value=0.0, max_value=9.0,
                                       allow_nan=False, allow_infinity=False)))
        return draw(st.sampled_from(["a", "b", "zz_1"]))
    kind = draw(st.integers(0, 3))
    if kind == 0:
        fn = draw(st.sampled_from(["sin", "cos", "exp", "atan", "pos", "neg", "abs", "sqrt", "ln"]))
        return f"{fn}({draw(_expr_sources(depth + 1))})"
    if kind == 1:
        fn = draw(st.sampled_from(["min", "max"]))
        return f"{fn}({draw(_expr_sources(depth + 1))}, {draw(_expr_sources(depth + 1))})"
    if kind == 2:
        return f"-({draw(_expr_sources(depth + 1))})"
    op = draw(st.sampled_from(["+", "-", "*", "/", "^"]))
    return f"({draw(_expr_sources(depth + 1))}) {op} ({draw(_expr_sources(depth + 1))})"


@given(_expr_sources())
@settings(max_examples=200)
def test_parse_unparse_roundtrip(src):
    ast = parse_expr(src)
    assert parse_expr(unparse(ast)) == ast


def test_free_variables():
    assert free_variables(parse_expr("sin(x1)*y1 + t - mu")) == {"x1", "y1", "t", "mu"}
