import itertools
import random

import pytest

from crformal.errors import PreconditionError, TruncationError
from crformal.gaussian import gr
from crformal.localalg import (
    codimension,
    codimension_clamped,
    evaluation_rank,
    generic_rank,
    local_dimension_is,
    monomial_basis,
    symbolic_rank_at_least,
)
from crformal.series import TruncatedSeries, VariableContext

XY = VariableContext(("x", "y"), ("z", "z"))
XYZ = VariableContext(("x", "y", "z"), ("z", "z", "z"))


def mono_series(ctx, *exps):
    """Series that is a sum of single monomials given as exponent tuples."""
    return TruncatedSeries(ctx, None, {tuple(e): gr(1) for e in exps})


def staircase_count(nvars, gens, bound):
    """Independent brute-force oracle for monomial ideals: count monomials
    divisible by no generator, scanning total degree <= bound."""
    standard = 0
    for deg in range(bound + 1):
        for mono in monomial_basis(nvars, deg):
            if sum(mono) != deg:
                continue
            if any(all(m >= g for m, g in zip(mono, gen)) for gen in gens):
                continue
            if deg == bound:
                return None  # still alive at the horizon: not finite up to bound
            standard += 1
    return standard


# -- codimension --------------------------------------------------------------


def test_codimension_x2_y():
    res = codimension([mono_series(XY, (2, 0)), mono_series(XY, (0, 1))], 12)
    assert res.finite and res.dimension == 2
    assert set(res.standard_monomials) == {"1", "x"}


def test_codimension_not_finite():
    res = codimension([mono_series(XY, (1, 0))], 10)
    assert not res.finite and res.cutoff_used == 10


def test_codimension_mixed_generators():
    x2_minus_y3 = TruncatedSeries(XY, None, {(2, 0): gr(1), (0, 3): gr(-1)})
    res = codimension([x2_minus_y3, mono_series(XY, (0, 2))], 12)
    assert res.finite and res.dimension == 4
    assert set(res.standard_monomials) == {"1", "x", "y", "x*y"}


def test_codimension_oracle_agreement():
    """Exact agreement with staircase counting on 100 seeded monomial ideals."""
    rng = random.Random(11)
    checked = 0
    while checked < 100:
        nvars = rng.choice([2, 3])
        ctx = XY if nvars == 2 else XYZ
        gens = []
        for _ in range(rng.randint(nvars, nvars + 2)):
            mono = [0] * nvars
            for _ in range(rng.randint(1, 4)):
                mono[rng.randrange(nvars)] += 1
            gens.append(tuple(mono))
        expected = staircase_count(nvars, gens, 13)
        res = codimension([mono_series(ctx, g) for g in gens], 12)
        if expected is None:
            assert not res.finite, gens
        else:
            assert res.finite and res.dimension == expected, gens
        checked += 1


def test_codimension_invariant_under_generator_mixing():
    rng = random.Random(12)
    for _ in range(20):
        gens = [
            TruncatedSeries(
                XY,
                None,
                {
                    (rng.randint(1, 2), rng.randint(0, 2)): gr(rng.randint(1, 3)),
                    (0, rng.randint(1, 3)): gr(rng.randint(-3, 3)),
                },
            )
            for _ in range(2)
        ]
        base = codimension(gens, 12)
        # invertible 2x2 integer mix of the generator vector
        mixed = [
            gens[0] * 1 + gens[1] * rng.randint(-2, 2),
            gens[1] * 1,
        ]
        other = codimension(mixed, 12)
        assert base.finite == other.finite
        if base.finite:
            assert base.dimension == other.dimension


def test_codimension_monotone_under_inclusion():
    rng = random.Random(13)
    for _ in range(20):
        gens = [mono_series(XY, (rng.randint(1, 3), 0)), mono_series(XY, (0, rng.randint(1, 3)))]
        bigger = gens + [mono_series(XY, (rng.randint(1, 2), rng.randint(0, 1)))]
        a = codimension(gens, 12)
        b = codimension(bigger, 12)
        if a.finite and b.finite:
            assert b.dimension <= a.dimension


def test_codimension_preconditions():
    with pytest.raises(TruncationError):
        codimension([TruncatedSeries(XY, 4, {(1, 0): gr(1)})], 8)
    with pytest.raises(PreconditionError):
        codimension([TruncatedSeries.constant(XY, 1)], 8)
    clamped = codimension_clamped([TruncatedSeries(XY, 4, {(1, 0): gr(1)})], 8)
    assert clamped.cutoff_used == 4


def test_codimension_zero_ideal():
    res = codimension([], 6, XY)
    assert not res.finite


# -- generic rank --------------------------------------------------------------


def var(ctx, name):
    return TruncatedSeries.variable(ctx, name)


def test_rank_swap_matrix():
    z, w = var(XY, "x"), var(XY, "y")
    lower, verdict = generic_rank([[z, w], [w, z]])
    assert lower == 2 and verdict.is_true


def test_rank_zero_matrix_exact_false():
    zero = TruncatedSeries.zero(XY)
    lower, verdict = generic_rank([[zero]])
    assert lower == 0 and verdict.is_false


def test_rank_zero_matrix_jet_unknown():
    zero = TruncatedSeries.zero(XY, 6)
    lower, verdict = generic_rank([[zero]])
    assert lower == 0 and verdict.is_unknown


def test_rank_target_exceeding_shape():
    z = var(XY, "x")
    _, verdict = generic_rank([[z]], target=2)
    assert verdict.is_false


def test_rank_paths_agree_on_small_matrices():
    rng = random.Random(14)
    for _ in range(40):
        rows = [
            [
                TruncatedSeries(
                    XY,
                    None,
                    {
                        (rng.randint(0, 2), rng.randint(0, 2)): gr(rng.randint(-2, 2)),
                        (rng.randint(0, 1), 0): gr(rng.randint(-1, 1)),
                    },
                )
                for _ in range(rng.randint(1, 4))
            ]
            for _ in range(rng.randint(1, 4))
        ]
        width = min(len(r) for r in rows)
        rows = [r[:width] for r in rows]
        by_eval = evaluation_rank(rows, seed=999, trials=6, bound=11)
        by_minors = 0
        for j in range(min(len(rows), width), 0, -1):
            if symbolic_rank_at_least(rows, j) is not None:
                by_minors = j
                break
        assert by_eval <= by_minors  # evaluation is a lower bound by construction
        lower, verdict = generic_rank(rows)
        assert lower == by_minors
        assert verdict.is_true == (by_minors == min(len(rows), width))


# -- probabilistic Krull dimension ---------------------------------------------


def test_dimension_of_hyperplane():
    w = mono_series(XY, (0, 1))
    verdict = local_dimension_is([w], 1, XY)
    assert verdict.is_true
    assert "probabilistic" in verdict.evidence


def test_dimension_of_full_ring():
    verdict = local_dimension_is([], 1, XY)
    assert verdict.is_false  # zero ideal in 2 variables has dimension 2


def test_dimension_graph_component():
    w = mono_series(XYZ, (0, 0, 1))
    verdict = local_dimension_is([w], 2, XYZ)
    assert verdict.is_true


def test_dimension_expected_too_large():
    with pytest.raises(PreconditionError):
        local_dimension_is([mono_series(XY, (1, 0))], 3, XY)
