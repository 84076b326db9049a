import math
import random
from fractions import Fraction

import pytest

from crformal.errors import PreconditionError, StructuralError, TruncationError
from crformal.gaussian import gr
from crformal.series import (
    TruncatedSeries,
    VariableContext,
    compose,
    invert_unit,
    jacobian,
    map_context,
    reverse,
    series_determinant,
)

XY = VariableContext(("x", "y"), ("z", "z"))


def var(name, ctx=XY, trunc=None):
    return TruncatedSeries.variable(ctx, name, trunc)


def rand_series(rng, ctx=XY, max_deg=3, trunc=None, density=0.7):
    terms = {}
    n = len(ctx)
    for _ in range(6):
        if rng.random() > density:
            continue
        mono = [0] * n
        for _ in range(rng.randint(0, max_deg)):
            mono[rng.randrange(n)] += 1
        terms[tuple(mono)] = gr(rng.randint(-4, 4), rng.randint(-4, 4))
    return TruncatedSeries(ctx, trunc, terms)


# -- ring structure ----------------------------------------------------------


def test_difference_of_squares():
    x = var("x")
    one = TruncatedSeries.constant(XY, 1)
    assert (one + x) * (one - x) == one - x * x


def test_additive_identity():
    x, y = var("x"), var("y")
    assert x * y + TruncatedSeries.zero(XY) == x * y


def test_product_truncates_cross_terms():
    x = var("x", trunc=2)
    p = (x + x * x) * (x + x * x)
    assert p.truncation == 2
    assert p == (var("x") * var("x")).truncate(2)


def test_ring_laws_on_sampled_series():
    rng = random.Random(1)
    for _ in range(60):
        trunc = rng.choice([None, 6])
        a, b, c = (rand_series(rng, trunc=trunc) for _ in range(3))
        assert (a + b) + c == a + (b + c)
        assert a + b == b + a
        assert a * b == b * a
        assert a * (b + c) == a * b + a * c
        assert (a * b) * c == a * (b * c)


def test_exactness_propagation():
    exact = var("x")
    jet = var("y", trunc=5)
    assert (exact * exact).is_exact
    assert not (exact * jet).is_exact
    assert (exact + jet).truncation == 5


def test_context_mismatch_rejected():
    other = VariableContext(("u",), ("z",))
    with pytest.raises(StructuralError):
        var("x") + TruncatedSeries.variable(other, "u")


def test_zero_pruning_and_order():
    x = var("x")
    s = x - x
    assert s.is_zero() and s.order() == math.inf
    assert (x * x + var("y")).order() == 1


# -- composition -------------------------------------------------------------


def test_compose_binomial():
    u_ctx = VariableContext(("u",), ("z",))
    f = TruncatedSeries.variable(u_ctx, "u") ** 2
    zw = VariableContext(("z", "w"), ("z", "w"))
    sub = TruncatedSeries.variable(zw, "z") + TruncatedSeries.variable(zw, "w")
    out = compose(f, {"u": sub})
    z, w = TruncatedSeries.variable(zw, "z"), TruncatedSeries.variable(zw, "w")
    assert out == z * z + z * w * 2 + w * w


def test_compose_graph_quadric():
    ctx = map_context(1, 1)
    f = TruncatedSeries.variable(ctx, "wb1") + (
        TruncatedSeries.variable(ctx, "z1") * TruncatedSeries.variable(ctx, "zb1") * gr(0, 2)
    )
    t_ctx = VariableContext(("t1", "t2"), ("t1", "t2"))
    out = compose(
        f,
        {
            "z1": TruncatedSeries.variable(t_ctx, "t2"),
            "zb1": TruncatedSeries.variable(t_ctx, "t1"),
            "wb1": TruncatedSeries.zero(t_ctx),
        },
    )
    expected = (
        TruncatedSeries.variable(t_ctx, "t2") * TruncatedSeries.variable(t_ctx, "t1") * gr(0, 2)
    )
    assert out == expected


def test_compose_identity_substitution():
    rng = random.Random(2)
    f = rand_series(rng)
    assert compose(f, {}, XY) == f


def test_compose_rejects_constant_terms():
    one_plus = TruncatedSeries.constant(XY, 1) + var("x")
    with pytest.raises(PreconditionError):
        compose(var("x"), {"x": one_plus})


def test_compose_associativity_on_chains():
    rng = random.Random(3)
    for _ in range(20):
        f = rand_series(rng, trunc=6)
        sigma = {"x": rand_series(rng, trunc=6), "y": rand_series(rng, trunc=6)}
        sigma = {
            k: v - TruncatedSeries.constant(XY, v.constant_term(), v.truncation)
            for k, v in sigma.items()
        }
        tau = {"x": rand_series(rng, trunc=6), "y": rand_series(rng, trunc=6)}
        tau = {
            k: v - TruncatedSeries.constant(XY, v.constant_term(), v.truncation)
            for k, v in tau.items()
        }
        lhs = compose(compose(f, sigma), tau)
        rhs = compose(f, {k: compose(v, tau) for k, v in sigma.items()})
        assert lhs == rhs


# -- unit inversion ----------------------------------------------------------


def test_geometric_series():
    x = var("x")
    inv = invert_unit(TruncatedSeries.constant(XY, 1) - x, 3)
    one = TruncatedSeries.constant(XY, 1, 3)
    assert inv == one + x.truncate(3) + (x * x).truncate(3) + (x * x * x).truncate(3)
    assert not inv.is_exact


def test_invert_constant():
    half = TruncatedSeries.constant(XY, Fraction(1, 2))
    assert invert_unit(half, 4).constant_term() == gr(2)


def test_invert_unit_product_is_one():
    rng = random.Random(4)
    for _ in range(25):
        f = rand_series(rng, trunc=6) + TruncatedSeries.constant(XY, rng.randint(1, 5), 6)
        if f.constant_term().is_zero():
            continue
        residual = f * invert_unit(f) - TruncatedSeries.constant(XY, 1, 6)
        assert residual.is_zero()


def test_invert_rejects_non_units():
    with pytest.raises(PreconditionError):
        invert_unit(var("x"), 4)
    with pytest.raises(TruncationError):
        invert_unit(TruncatedSeries.constant(XY, 1) + var("x"))


# -- reversion ---------------------------------------------------------------


def test_reverse_identity_and_scaling():
    u = var("x", trunc=5)
    assert reverse([u], ["x"])[0] == u
    half = reverse([u * 2], ["x"])[0]
    assert half == u * Fraction(1, 2)


def test_reverse_quadratic():
    u = var("x", trunc=3)
    g = reverse([u + u * u], ["x"])[0]
    assert g == u - (u * u).truncate(3) + (u * u * u).truncate(3) * 2
    back = compose(u + u * u, {"x": g})
    assert back == u


def test_reverse_with_parameters():
    rng = random.Random(5)
    for _ in range(15):
        # invertible in x with y carried through as a parameter
        f = var("x", trunc=6) + rand_series(rng, trunc=6)
        f = f - TruncatedSeries.constant(XY, f.constant_term(), 6)
        lin = f.coefficient((1, 0))
        if lin.is_zero():
            continue
        g = reverse([f], ["x"])[0]
        back = compose(f, {"x": g})
        assert back == var("x", trunc=6)


def test_reverse_rejects_singular_linear_part():
    from crformal.errors import SingularLinearPartError

    with pytest.raises(SingularLinearPartError):
        reverse([var("x", trunc=4) * 0 + (var("x", trunc=4) ** 2)], ["x"])


# -- conjugation, differentiation, determinants ------------------------------


def test_conjugate_examples():
    s = var("x") * gr(2, 3)
    assert s.conjugate() == var("x") * gr(2, -3)
    real = var("x") * 2 + var("y") ** 2
    assert real.conjugate() == real
    f = var("x") * gr(0, 1) + (var("y") ** 2) * gr(1, -1)
    assert f.conjugate().conjugate() == f


def test_conjugate_is_ring_homomorphism():
    rng = random.Random(6)
    for _ in range(20):
        a, b = rand_series(rng), rand_series(rng)
        assert (a * b).conjugate() == a.conjugate() * b.conjugate()
        assert (a + b).conjugate() == a.conjugate() + b.conjugate()


def test_differentiate():
    x, y = var("x"), var("y")
    assert (x * x * y).differentiate("x") == x * y * 2
    jet = rand_series(random.Random(7), trunc=5)
    assert jet.differentiate("x").truncation == 4


def test_determinant_2x2():
    z, w = var("x"), var("y")
    det = series_determinant([[z, w], [w, z]])
    assert det == z * z - w * w


def test_determinant_size_bound():
    one = TruncatedSeries.constant(XY, 1)
    with pytest.raises(PreconditionError):
        series_determinant([[one] * 9 for _ in range(9)])


def test_rank_one_update_determinant_identity():
    """det(C + x y^t) = det C + sum_i x_i det C_i(y), 200 seeded instances."""
    rng = random.Random(8)
    ctx = VariableContext(("s",), ("z",))

    def const(v):
        return TruncatedSeries.constant(ctx, v)

    for trial in range(200):
        n = rng.randint(2, 5)
        c_rows = [[gr(Fraction(rng.randint(-5, 5), rng.randint(1, 3))) for _ in range(n)] for _ in range(n)]
        x = [gr(rng.randint(-4, 4), rng.randint(-2, 2)) for _ in range(n)]
        y = [gr(rng.randint(-4, 4), rng.randint(-2, 2)) for _ in range(n)]
        updated = [
            [const(c_rows[r][cidx] + x[r] * y[cidx]) for cidx in range(n)]
            for r in range(n)
        ]
        lhs = series_determinant(updated).constant_term()
        rhs = series_determinant([[const(v) for v in row] for row in c_rows]).constant_term()
        for i in range(n):
            replaced = [list(row) for row in c_rows]
            replaced[i] = list(y)
            rhs = rhs + x[i] * series_determinant(
                [[const(v) for v in row] for row in replaced]
            ).constant_term()
        assert lhs == rhs, f"trial {trial}"


def test_jacobian_shape():
    rows = jacobian([var("x") * var("y"), var("y") ** 2], ["x", "y"])
    assert rows[0][0] == var("y")
    assert rows[1][0].is_zero()
    assert rows[1][1] == var("y") * 2
