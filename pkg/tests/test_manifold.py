import pytest

from crformal.errors import InputRejectedError, PreconditionError
from crformal.expr import format_series, parse_expression
from crformal.fixtures import quadric_power
from crformal.gaussian import gr
from crformal.manifold import (
    FormalGenericSubmanifold,
    graph_solve,
    ingest,
    normalize,
    verify_normal_form,
    verify_reality,
)
from crformal.series import TruncatedSeries, full_context, map_context

K = 8
CTX = map_context(1, 1)
FULL = full_context(1, 1)


def q_of(text, ctx=CTX, trunc=K):
    return parse_expression(text, ctx, trunc)


# -- reality and normal form ---------------------------------------------------


def test_quadric_passes_both_verifications():
    q = q_of("wb1 + 2*i*z1*zb1")
    assert verify_reality([q]).is_true
    assert verify_normal_form([q]).is_true


def test_flat_plane_passes():
    q = q_of("wb1")
    assert verify_reality([q]).is_true
    assert verify_normal_form([q]).is_true


def test_non_real_graph_rejected():
    q = q_of("wb1 + z1*wb1")
    verdict = verify_reality([q])
    assert verdict.is_false
    assert "coefficient" in verdict.evidence
    with pytest.raises(InputRejectedError):
        normalize([q], K)


# -- graph solving ---------------------------------------------------------------


def test_graph_solve_explicit():
    rho = q_of("w1 - wb1 - 2*i*z1*zb1", FULL)
    q0 = graph_solve([rho], truncation=K)
    assert format_series(q0[0]) == "wb1 + 2*i*z1*zb1"


def test_graph_solve_flat():
    q0 = graph_solve([q_of("w1 - wb1", FULL)], truncation=K)
    assert format_series(q0[0]) == "wb1"


def test_graph_solve_implicit_weight():
    # w appears on the right: w = tau + 2i z chi w tau, solved iteratively
    rho = q_of("w1 - wb1 - 2*i*z1*zb1*w1*wb1", FULL)
    q0 = graph_solve([rho], truncation=K)
    s = q0[0]
    assert s.coefficient((0, 0, 1)) == gr(1)
    assert s.coefficient((1, 1, 2)) == gr(0, 2)  # 2i z chi tau^2
    assert s.coefficient((2, 2, 3)) == gr(-4)  # next correction at degree 7
    assert not s.is_exact


def test_graph_solve_singular_split_rejected():
    rho = q_of("z1 - zb1", FULL)
    with pytest.raises(PreconditionError) as err:
        graph_solve([rho], truncation=K)
    assert "split" in str(err.value)


def test_graph_solve_alternate_split():
    # solve for z1 instead of w1
    rho = q_of("z1 - zb1 - w1*wb1", FULL)
    q0 = graph_solve([rho], w_split=["z1"], truncation=K)
    # in the fresh context the remaining holomorphic variable is z1, its
    # partner zb1 sits in the chi slot, and the solved partner in tau
    assert format_series(q0[0]) == "wb1 + z1*zb1"


# -- normalization ---------------------------------------------------------------


def test_normalize_is_identity_on_normal_input():
    q = q_of("wb1 + 2*i*z1*zb1")
    out, change, already = normalize([q], K)
    assert already
    assert out[0] == q
    assert format_series(change[0]) == "w1"


def test_normalize_recovers_quadric_from_sheared_coordinates():
    # push Im w = |z|^2 through w -> w + z^2: reality survives, normal form
    # does not; normalization must recover the quadric exactly
    q = q_of("wb1 + z1^2 - zb1^2 + 2*i*z1*zb1")
    assert verify_reality([q]).is_true
    assert not verify_normal_form([q]).is_true
    out, change, already = normalize([q], K)
    assert not already
    assert format_series(out[0]) == "wb1 + 2*i*z1*zb1"
    assert format_series(change[0]) == "-1*z1^2 + w1"


def test_normalize_handles_nontrivial_pure_w_slice():
    # pull Im w = |z|^2 back through (z + w, w): the pure-w slice of the
    # graph is tau/(1 - 2i tau), not the identity
    rho = q_of("w1 - wb1 - 2*i*(z1+w1)*(zb1+wb1)", FULL)
    q0 = graph_solve([rho], truncation=K)
    zero = TruncatedSeries.zero(CTX)
    from crformal.series import compose

    slice_a = compose(q0[0], {"z1": zero, "zb1": zero}, CTX)
    assert slice_a.coefficient((0, 0, 2)) == gr(0, 2)  # tau^2 coefficient 2i
    out, change, already = normalize([q0[0]], K)
    assert not already
    assert verify_normal_form(out).is_true
    assert verify_reality(out).is_true


def test_normalize_idempotent_on_graph_solved_fixtures():
    for rho_text in (
        "w1 - wb1 - 2*i*z1*zb1",
        "w1 - wb1 - i*(w1+wb1)*z1*zb1",
        "w1 - wb1 - 2*i*z1*zb1*w1*wb1",
        "w1 - wb1 - 2*i*(z1+w1)*(zb1+wb1)",
    ):
        q0 = graph_solve([q_of(rho_text, FULL)], truncation=K)
        m, _ = ingest(q0, 1, 1, K)
        again, change, already = normalize(list(m.q), K)
        assert already
        assert [s.terms for s in again] == [s.terms for s in m.q]


# -- Segre chains -----------------------------------------------------------------


def test_segre_base_case_always_zero():
    for k_pow in (1, 2, 3):
        m = quadric_power(k_pow, K)
        assert all(s.is_zero() for s in m.segre(1).u)


def test_segre_quadric_values():
    m = quadric_power(1, K)
    assert format_series(m.segre(2).u[0]) == "2*i*t1_1*t2_1"
    assert format_series(m.segre(3).u[0]) == "2*i*t2_1*t3_1 - 2*i*t1_1*t2_1"


def test_segre_cache_and_bound():
    m = quadric_power(1, K)
    assert m.segre(2) is m.segre(2)
    with pytest.raises(PreconditionError):
        m.segre(5)  # beyond 2d+2 for d=1


def test_reflection_subspace_vanishing():
    for m_obj in (quadric_power(1, K), quadric_power(2, K)):
        for half in (1, 2):
            assert all(s.is_zero() for s in m_obj.w_vanishing_residual(half))


# -- finite type -------------------------------------------------------------------


def test_quadric_is_finite_type():
    verdict = quadric_power(1, K).is_finite_type()
    assert verdict.is_true


def test_infinite_type_targets_are_unknown_at_truncation():
    m, _ = ingest(
        graph_solve([q_of("w1 - wb1 - i*(w1+wb1)*z1*zb1", FULL)], truncation=K), 1, 1, K
    )
    verdict = m.is_finite_type()
    assert verdict.is_unknown
    assert "identically zero" in verdict.evidence


def test_flat_plane_certified_not_finite_type():
    m = FormalGenericSubmanifold.from_normal_graph(1, 1, [q_of("wb1")], K)
    assert m.is_finite_type().is_false


def test_finite_type_criteria_agree_on_corpus():
    # the v-rank, u-rank and restricted-jacobian criteria must coincide on
    # exact data; is_finite_type raises if they do not, so reaching a
    # verdict at all is the assertion
    for k_pow in (1, 2, 3):
        assert quadric_power(k_pow, K).is_finite_type().is_true


# -- essential type ----------------------------------------------------------------


@pytest.mark.parametrize("k_pow,expected", [(1, 1), (2, 2), (3, 3), (4, 4)])
def test_essential_type_of_power_quadrics(k_pow, expected):
    res = quadric_power(k_pow, K).essential_type()
    assert res.finite and res.dimension == expected


def test_essential_type_flat_plane_not_finite():
    m = FormalGenericSubmanifold.from_normal_graph(1, 1, [q_of("wb1")], K)
    res = m.essential_type()
    assert not res.finite
    assert m.essential_finiteness().is_false


def test_essential_type_invariant_under_biholomorphic_pullback():
    # pulling back through an invertible map preserves the essential type
    from crformal.mapping import SeedSpec, generate_audit_triple

    pair = generate_audit_triple(SeedSpec(1, 1, K, 12, seed=3, family="exact"))
    mult = pair.finite()[1]
    if mult.finite and mult.dimension == 1:
        src = pair.source.essential_type()
        tgt = pair.target.essential_type()
        if src.finite and tgt.finite:
            assert src.dimension == tgt.dimension


# -- finite nondegeneracy -----------------------------------------------------------


def test_sphere_quadric_is_order_one():
    verdict, order = quadric_power(1, K).is_finitely_nondegenerate()
    assert verdict.is_true and order == 1


def test_higher_power_quadric_is_degenerate():
    verdict, order = quadric_power(2, K).is_finitely_nondegenerate()
    assert verdict.is_false and order is None


def test_flat_plane_is_degenerate():
    m = FormalGenericSubmanifold.from_normal_graph(1, 1, [q_of("wb1")], K)
    verdict, _ = m.is_finitely_nondegenerate()
    assert verdict.is_false


def test_two_variable_mixed_order():
    ctx2 = map_context(2, 1)
    q = parse_expression("wb1 + 2*i*(z1*zb1 + z2^2*zb2^2)", ctx2, K)
    m = FormalGenericSubmanifold.from_normal_graph(2, 1, [q], K)
    verdict, order = m.is_finitely_nondegenerate()
    assert verdict.is_true and order == 2
