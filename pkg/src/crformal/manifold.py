"""Formal generic submanifolds of C^N in normal coordinates.

A manifold of CR dimension n and codimension d is stored as the graph
series Q (d series in z, chi, tau) of the defining equation w = Q(z, zbar,
wbar), together with verified reality and normal-form verdicts.  The module
covers ingestion from general defining series (graph solving), the passage
to normal coordinates, iterated Segre mappings, and the manifold-level
invariants: finite type, essential type and finite nondegeneracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import (
    InputRejectedError,
    InternalInconsistencyError,
    PreconditionError,
    SingularLinearPartError,
    StructuralError,
)
from .gaussian import ONE, GaussianRational
from .localalg import (
    CodimensionResult,
    Verdict,
    certified,
    codimension_clamped,
    generic_rank,
    unknown,
)
from .series import (
    TruncatedSeries,
    VariableContext,
    chi_context,
    compose,
    jacobian,
    map_context,
    reverse,
    segre_context,
    zw_context,
)


def _zero_sub(ctx: VariableContext, names) -> dict:
    return {name: TruncatedSeries.zero(ctx) for name in names}


def _witness(residuals: Sequence[TruncatedSeries]) -> str:
    from .expr import format_monomial

    for j, r in enumerate(residuals):
        if not r.is_zero():
            mono = min(r.terms, key=lambda m: (sum(m), m))
            return (
                f"component {j + 1} has residual term "
                f"{format_monomial(r.context, mono)} with coefficient {r.terms[mono]}"
            )
    return "all residual components vanish"


def conjugate_swapped(q: Sequence[TruncatedSeries]) -> list[TruncatedSeries]:
    """Qbar with its first two slots exchanged: (z,chi,tau) -> Qbar(chi,z,tau)."""
    ctx = q[0].context
    n = len(ctx.indices_with_role("z"))
    swap = {}
    for i in range(1, n + 1):
        swap[f"z{i}"] = TruncatedSeries.variable(ctx, f"zb{i}")
        swap[f"zb{i}"] = TruncatedSeries.variable(ctx, f"z{i}")
    return [compose(s.conjugate(), swap, ctx) for s in q]


def reality_residual(q: Sequence[TruncatedSeries]) -> list[TruncatedSeries]:
    """Residual of Q(z, chi, Qbar(chi, z, tau)) - tau, zero for real data."""
    ctx = q[0].context
    tau_names = ctx.names_with_role("tau")
    qbar = conjugate_swapped(q)
    out = []
    for j, s in enumerate(q):
        sub = {name: qbar[k] for k, name in enumerate(tau_names)}
        out.append(compose(s, sub, ctx) - TruncatedSeries.variable(ctx, tau_names[j]))
    return out


def verify_reality(q: Sequence[TruncatedSeries]) -> Verdict:
    res = reality_residual(q)
    if all(r.is_zero() for r in res):
        k = q[0].truncation
        scope = "exactly" if all(s.is_exact for s in q) else f"through degree {k}"
        return certified(True, f"reality identity holds {scope}")
    return certified(False, _witness(res))


def normal_form_residual(q: Sequence[TruncatedSeries]) -> list[TruncatedSeries]:
    """Residuals of Q(0,chi,tau) - tau and Q(z,0,tau) - tau, concatenated."""
    ctx = q[0].context
    z_names = ctx.names_with_role("z")
    chi_names = ctx.names_with_role("chi")
    tau_names = ctx.names_with_role("tau")
    out = []
    for j, s in enumerate(q):
        t = TruncatedSeries.variable(ctx, tau_names[j])
        out.append(compose(s, _zero_sub(ctx, z_names), ctx) - t)
        out.append(compose(s, _zero_sub(ctx, chi_names), ctx) - t)
    return out


def verify_normal_form(q: Sequence[TruncatedSeries]) -> Verdict:
    res = normal_form_residual(q)
    if all(r.is_zero() for r in res):
        k = q[0].truncation
        scope = "exactly" if all(s.is_exact for s in q) else f"through degree {k}"
        return certified(True, f"normal-form conditions hold {scope}")
    return certified(False, _witness(res))


@dataclass(frozen=True)
class SegreMapping:
    """The k-th iterated parametrization v^k(t) = (t^k, u^k(t)) of a manifold."""

    k: int
    context: VariableContext
    v: tuple[TruncatedSeries, ...]
    u: tuple[TruncatedSeries, ...]


class FormalGenericSubmanifold:
    """A formal generic submanifold through 0 in normal coordinates.

    Instances are immutable; the Segre cache is a write-once memo keyed by
    the chain length, safe to populate concurrently.
    """

    def __init__(
        self,
        n: int,
        d: int,
        q: Sequence[TruncatedSeries],
        truncation: int,
        reality: Verdict,
        normality: Verdict,
    ):
        if len(q) != d:
            raise StructuralError("expected d graph components")
        expected_ctx = map_context(n, d)
        for s in q:
            if s.context != expected_ctx:
                raise StructuralError("graph components must live in the (z, zb, wb) context")
            if not s.constant_term().is_zero():
                raise PreconditionError("graph components must vanish at the origin")
        self.n = n
        self.d = d
        self.N = n + d
        self.q = tuple(q)
        self.truncation = truncation
        self.reality_verified = reality
        self.normality_verified = normality
        self.context = expected_ctx
        self._segre: dict[int, SegreMapping] = {}
        self._finite_type: Optional[Verdict] = None

    @property
    def exact(self) -> bool:
        return all(s.is_exact for s in self.q)

    @classmethod
    def from_normal_graph(cls, n, d, q, truncation) -> "FormalGenericSubmanifold":
        """Build from graph series that are expected to be real and normal."""
        reality = verify_reality(q)
        if not reality.is_true:
            raise InputRejectedError(
                f"not a formal real submanifold: {reality.evidence}"
            )
        normality = verify_normal_form(q)
        if not normality.is_true:
            raise InputRejectedError(
                "graph series are not in normal form; run normalize() or "
                f"supply a defining system ({normality.evidence})"
            )
        return cls(n, d, q, truncation, reality, normality)

    # -- Segre mappings -------------------------------------------------

    def segre_bound(self) -> int:
        return 2 * self.d + 2

    def segre(self, k: int, bound: Optional[int] = None) -> SegreMapping:
        """Chain of iterated parametrizations, cached per (manifold, k)."""
        bound = self.segre_bound() if bound is None else bound
        if not 1 <= k <= bound:
            raise PreconditionError(f"chain length {k} outside 1..{bound}")
        got = self._segre.get(k)
        if got is not None:
            return got
        ctx_k = segre_context(self.n, k)
        if k == 1:
            u = tuple(TruncatedSeries.zero(ctx_k, None) for _ in range(self.d))
        else:
            prev = self.segre(k - 1, bound=bound)
            sub = {}
            for i in range(1, self.n + 1):
                sub[f"z{i}"] = TruncatedSeries.variable(ctx_k, f"t{k}_{i}")
                sub[f"zb{i}"] = TruncatedSeries.variable(ctx_k, f"t{k - 1}_{i}")
            for j, s in enumerate(prev.u):
                lifted = s.conjugate().map_context(ctx_k)
                sub[f"wb{j + 1}"] = lifted
            u = tuple(compose(s, sub, ctx_k) for s in self.q)
        v = tuple(
            TruncatedSeries.variable(ctx_k, f"t{k}_{i}") for i in range(1, self.n + 1)
        ) + u
        mapping = SegreMapping(k, ctx_k, v, u)
        return self._segre.setdefault(k, mapping)

    # -- invariants ------------------------------------------------------

    def is_finite_type(self, seed: int = 0) -> Verdict:
        """Finite type via the generic rank of the (d+1)-st parametrization.

        Three independent criteria are computed: full generic rank N of
        v^{d+1}, generic rank d of u^{d+1}, and the rank of the u^{2(d+1)}
        jacobian restricted to the reflection subspace.  On exact data they
        must agree outright; on jets a certificate may be visible to one
        criterion and below truncation for another, so agreement is only
        enforced between certified answers.
        """
        if self._finite_type is not None:
            return self._finite_type
        k = self.d + 1
        sm = self.segre(k)
        t_names = list(sm.context.names)
        rank_v = generic_rank(jacobian(sm.v, t_names), target=self.N, seed=seed)
        rank_u = generic_rank(jacobian(sm.u, t_names), target=self.d, seed=seed)
        refl = self._reflection_rank(seed=seed)
        achieved = [rank_v[1].is_true, rank_u[1].is_true, refl.is_true]
        if self.exact and len(set(achieved)) > 1:
            raise InternalInconsistencyError(
                "finite-type criteria disagree on exact data: "
                f"v-rank={rank_v[1].value}, u-rank={rank_u[1].value}, "
                f"restricted={refl.value}"
            )
        if all(achieved):
            verdict = certified(
                True,
                f"rank {self.N} of the order-{k} parametrization certified; "
                "all three criteria agree",
                seed,
            )
        elif self.exact:
            verdict = certified(
                False,
                "all full-size minors of the parametrization jacobians vanish "
                "identically (exact data)",
                seed,
            )
        else:
            zero_note = (
                " (u^{} is identically zero at this truncation)".format(k)
                if all(s.is_zero() for s in sm.u)
                else ""
            )
            verdict = unknown(
                f"not finite type up to truncation {self.truncation}{zero_note}",
                seed,
            )
        self._finite_type = verdict
        return verdict

    def _reflection_rank(self, seed: int = 0) -> Verdict:
        """Rank-d test of the doubled-chain jacobian restricted to the
        diagonal reflection subspace (t^{2m} = 0, t^{2m-j} = t^j)."""
        m = self.d + 1
        k2 = 2 * m
        sm = self.segre(k2)
        tprime = [f"t{j}_{i}" for j in range(1, k2) for i in range(1, self.n + 1)]
        rows = jacobian(sm.u, tprime)
        ctx_m = segre_context(self.n, m)
        sub = {}
        for i in range(1, self.n + 1):
            sub[f"t{k2}_{i}"] = TruncatedSeries.zero(ctx_m)
            for j in range(1, m):
                sub[f"t{k2 - j}_{i}"] = TruncatedSeries.variable(ctx_m, f"t{j}_{i}")
        restricted = [[compose(e, sub, ctx_m) for e in row] for row in rows]
        _, verdict = generic_rank(restricted, target=self.d, seed=seed)
        return verdict

    def w_vanishing_residual(self, m: int) -> list[TruncatedSeries]:
        """v^{2m} restricted to the reflection subspace; identically zero."""
        k2 = 2 * m
        sm = self.segre(k2)
        ctx_m = segre_context(self.n, m)
        sub = {}
        for i in range(1, self.n + 1):
            sub[f"t{k2}_{i}"] = TruncatedSeries.zero(ctx_m)
            for j in range(1, m):
                sub[f"t{k2 - j}_{i}"] = TruncatedSeries.variable(ctx_m, f"t{j}_{i}")
        return [compose(s, sub, ctx_m) for s in sm.v]

    def essential_type(self, cutoff: int = 12) -> CodimensionResult:
        """Codimension in C[[chi]] of the ideal of z-coefficient vectors of
        Q(z, chi, 0).

        For jets the coefficient of z^alpha is only known through chi-degree
        K - |alpha|; each extracted generator carries that truncation and
        the cutoff is clamped accordingly (visible in the result).
        """
        ctx = self.context
        tau_names = ctx.names_with_role("tau")
        chi_ctx = chi_context(self.n)
        at_tau0 = [compose(s, _zero_sub(ctx, tau_names), ctx) for s in self.q]
        n = self.n
        gens = []
        for s in at_tau0:
            per_alpha: dict[tuple, dict] = {}
            for mono, coeff in s.terms.items():
                alpha = mono[:n]
                if sum(alpha) == 0:
                    continue
                per_alpha.setdefault(alpha, {})[mono[n : 2 * n]] = coeff
            for alpha, terms in per_alpha.items():
                trunc = None
                if s.truncation is not None:
                    trunc = max(s.truncation - sum(alpha), 0)
                gens.append(TruncatedSeries(chi_ctx, trunc, terms))
        gens = [g for g in gens if not g.is_zero()]
        usable = [g for g in gens if g.truncation is None or g.truncation >= 1]
        result = codimension_clamped(usable, cutoff, chi_ctx)
        if len(usable) < len(gens) and result.exact:
            # dropped shallow-jet generators: the value is an upper bound only
            result = CodimensionResult(
                result.finite,
                result.dimension,
                result.certificate_degree,
                result.cutoff_used,
                result.standard_monomials,
                False,
            )
        return result

    def essential_finiteness(self, cutoff: int = 12) -> Verdict:
        res = self.essential_type(cutoff)
        if res.finite:
            return res.as_verdict("essential ideal")
        if self.exact and self._essential_ideal_is_zero():
            return certified(False, "essential ideal is zero (exact data)")
        return unknown(
            f"essential ideal: no finite certificate up to cutoff {res.cutoff_used}"
        )

    def _essential_ideal_is_zero(self) -> bool:
        ctx = self.context
        tau_names = ctx.names_with_role("tau")
        at_tau0 = [compose(s, _zero_sub(ctx, tau_names), ctx) for s in self.q]
        return all(s.is_zero() for s in at_tau0)

    def is_finitely_nondegenerate(self, max_order: Optional[int] = None):
        """Finite nondegeneracy and its order, as (verdict, order or None).

        In normal coordinates the CR derivatives of the defining gradient
        rows reduce to plain chi-derivatives of dQ/dz evaluated on
        (0, chi, 0): the w-directions are always in the span, so the span
        reaches all of C^N exactly when the chi-coefficient vectors of
        dQ_j/dz(0, chi, 0) span C^n.
        """
        from .linalg import matrix_rank

        if self.n == 0:
            return certified(True, "totally real: the w-gradients already span"), 0
        if max_order is None:
            max_order = self.truncation if self.exact else self.truncation - 1
        if not self.exact and max_order >= self.truncation:
            raise PreconditionError(
                f"order bound {max_order} needs jets beyond truncation {self.truncation}"
            )
        ctx = self.context
        n = self.n
        z_names = ctx.names_with_role("z")
        tau_names = ctx.names_with_role("tau")
        kill = _zero_sub(ctx, z_names) | _zero_sub(ctx, tau_names)
        by_order: dict[int, list[list[GaussianRational]]] = {}
        for s in self.q:
            per_alpha: dict[tuple, list[GaussianRational]] = {}
            for i, name in enumerate(z_names):
                row = compose(s.differentiate(name), kill, ctx)
                for mono, coeff in row.terms.items():
                    alpha = mono[n : 2 * n]
                    if sum(alpha) == 0:
                        continue
                    per_alpha.setdefault(alpha, [GaussianRational(0)] * n)[i] = coeff
            for alpha, vec in per_alpha.items():
                by_order.setdefault(sum(alpha), []).append(vec)
        horizon = max(by_order, default=0) if self.exact else max_order
        collected: list[list[GaussianRational]] = []
        for ell in range(1, horizon + 1):
            layer = by_order.get(ell)
            if not layer:
                continue
            collected.extend(layer)
            if matrix_rank(collected) == n:
                return certified(True, f"finitely nondegenerate of order {ell}"), ell
        if self.exact:
            return (
                certified(
                    False,
                    "the iterated derivative span never reaches full rank "
                    f"(exact data, all coefficient vectors enumerated up to degree {horizon})",
                ),
                None,
            )
        return unknown(f"not finitely nondegenerate up to order {max_order}"), None


# -- ingestion --------------------------------------------------------------


def graph_solve(
    rho: Sequence[TruncatedSeries],
    w_split: Optional[Sequence[str]] = None,
    truncation: Optional[int] = None,
) -> list[TruncatedSeries]:
    """Solve a defining system rho(Z, zeta) = 0 for the chosen w-block.

    Returns the graph series Q0(z, chi, tau) with rho(z, Q0, chi, tau) = 0
    through the working truncation, found by jet Newton iteration.  The
    solved variables (``w_split``, default the w-block) must have an
    invertible linear block at 0; otherwise the error reports the rank found
    and suggests changing the split.
    """
    from .linalg import invert_matrix, matrix_rank

    ctx = rho[0].context
    for s in rho:
        if s.context != ctx:
            raise StructuralError("defining series must share one context")
        if not s.constant_term().is_zero():
            raise PreconditionError("defining series must vanish at the origin")
    d = len(rho)
    z_all = ctx.names_with_role("z") + ctx.names_with_role("w")
    if w_split is None:
        w_split = ctx.names_with_role("w")
    w_split = list(w_split)
    if len(w_split) != d or len(set(w_split)) != d:
        raise PreconditionError(f"w split must pick {d} distinct holomorphic variables")
    for name in w_split:
        if name not in z_all:
            raise PreconditionError(f"{name!r} is not a holomorphic coordinate")
    z_rest = [name for name in z_all if name not in w_split]
    n = len(z_rest)

    def partner(name: str) -> str:
        return "zb" + name[1:] if name.startswith("z") else "wb" + name[1:]

    trunc = truncation
    for s in rho:
        if s.truncation is not None:
            trunc = s.truncation if trunc is None else min(trunc, s.truncation)
    if trunc is None:
        raise PreconditionError("graph solving requires a truncation")

    block = []
    for s in rho:
        row = []
        for name in w_split:
            mono = [0] * len(ctx)
            mono[ctx.index(name)] = 1
            row.append(s.coefficient(tuple(mono)))
        block.append(row)
    try:
        block_inv = invert_matrix(block)
    except SingularLinearPartError:
        raise PreconditionError(
            f"the linear block of the chosen w variables is singular "
            f"(rank {matrix_rank(block)} of {d}); choose a different split"
        ) from None

    target = map_context(n, d)
    base_sub = {}
    for i, name in enumerate(z_rest, start=1):
        base_sub[name] = TruncatedSeries.variable(target, f"z{i}")
        base_sub[partner(name)] = TruncatedSeries.variable(target, f"zb{i}")
    for j, name in enumerate(w_split, start=1):
        base_sub[partner(name)] = TruncatedSeries.variable(target, f"wb{j}")

    q = [TruncatedSeries.zero(target, trunc) for _ in range(d)]
    for _ in range(trunc + 1):
        sub = dict(base_sub)
        for j, name in enumerate(w_split):
            sub[name] = q[j]
        value = [compose(s.truncate(trunc), sub, target) for s in rho]
        new_q = []
        for i in range(d):
            corr = TruncatedSeries.zero(target, trunc)
            for j in range(d):
                c = block_inv[i][j]
                if not c.is_zero():
                    corr = corr + value[j] * c
            new_q.append(q[i] - corr)
        if all(new_q[i].terms == q[i].terms for i in range(d)):
            q = new_q
            break
        q = new_q
    return q


def normalize(
    q0: Sequence[TruncatedSeries], truncation: Optional[int] = None
) -> tuple[list[TruncatedSeries], list[TruncatedSeries], bool]:
    """Pass real graph series to normal coordinates.

    Returns (Q, change, already_normal) where the coordinate change is
    w' = change(z, w) (d series in the (z, w) context) and Q is the graph in
    the new coordinates, with both normal-form conditions verified.

    The change is built from the reversion g(z, .) of u -> Q0(z, 0, u).
    When the pure-w slice A = Q0(0, 0, .) is not the identity, the plain
    substitution w' = g(z, w) cannot satisfy the normal-form conditions
    (they come out as A^{-1} instead of the identity); composing with
    k0 = id + conj(A) repairs this, because the reality identity makes
    conj(k0) = k0 o A hold on the nose.  Already-normal input is returned
    unchanged, which makes normalization idempotent and exactness-preserving.
    """
    ctx = q0[0].context
    d = len(q0)
    n = len(ctx.indices_with_role("z"))
    reality = verify_reality(q0)
    if not reality.is_true:
        raise InputRejectedError(f"not a formal real submanifold: {reality.evidence}")
    zw = zw_context(n, d)
    if verify_normal_form(q0).is_true:
        identity = [TruncatedSeries.variable(zw, f"w{j}") for j in range(1, d + 1)]
        return list(q0), identity, True

    trunc = truncation
    for s in q0:
        if s.truncation is not None:
            trunc = s.truncation if trunc is None else min(trunc, s.truncation)
    if trunc is None:
        raise PreconditionError("normalizing exact non-normal data requires a truncation")

    z_names = ctx.names_with_role("z")
    chi_names = ctx.names_with_role("chi")
    tau_names = ctx.names_with_role("tau")
    tau_vars = [TruncatedSeries.variable(ctx, name) for name in tau_names]

    a = [compose(s, _zero_sub(ctx, z_names + chi_names), ctx) for s in q0]
    a_is_identity = all(a[j].terms == tau_vars[j].terms for j in range(d))
    if a_is_identity:
        k0 = tau_vars
        k0_inv = tau_vars
    else:
        k0 = [tau_vars[j] + a[j].conjugate() for j in range(d)]
        k0_bar = [s.conjugate() for s in k0]
        k0_of_a = [compose(s, dict(zip(tau_names, a)), ctx) for s in k0]
        for lhs, rhs in zip(k0_bar, k0_of_a):
            if not (lhs.truncate(trunc) - rhs.truncate(trunc)).is_zero():
                raise InternalInconsistencyError(
                    "pure-w normalization is inconsistent with the reality identity"
                )
        k0_inv = reverse(k0, tau_names, trunc)

    q_chi0 = [compose(s, _zero_sub(ctx, chi_names), ctx) for s in q0]
    g = reverse(q_chi0, tau_names, trunc)
    change = [compose(s.conjugate(), dict(zip(tau_names, g)), ctx) for s in k0]

    # Qbar(chi, 0, tau): conjugate coefficients, chi into the first slot,
    # zero into the second
    qbar_chi0 = [
        compose(
            s.conjugate(),
            {
                **{z: TruncatedSeries.variable(ctx, c) for z, c in zip(z_names, chi_names)},
                **_zero_sub(ctx, chi_names),
            },
            ctx,
        )
        for s in q0
    ]
    s_inner = [compose(s, dict(zip(tau_names, k0_inv)), ctx) for s in qbar_chi0]
    inner = [compose(s, dict(zip(tau_names, s_inner)), ctx) for s in q0]
    q_new = [compose(s, dict(zip(tau_names, inner)), ctx) for s in change]

    if not verify_normal_form(q_new).is_true:
        raise InternalInconsistencyError(
            "normalization failed to reach normal form; the w-substitution "
            "construction does not suffice for this input"
        )
    if not verify_reality(q_new).is_true:
        raise InternalInconsistencyError("normalization broke the reality identity")
    change_zw = [
        s.map_context(zw, {t: f"w{j + 1}" for j, t in enumerate(tau_names)})
        for s in change
    ]
    return q_new, change_zw, False


def ingest(
    q0: Sequence[TruncatedSeries], n: int, d: int, truncation: int
) -> tuple[FormalGenericSubmanifold, list[TruncatedSeries]]:
    """Normalize (when needed) and wrap graph series as a manifold."""
    q_new, change, _ = normalize(q0, truncation)
    reality = verify_reality(q_new)
    normality = verify_normal_form(q_new)
    m = FormalGenericSubmanifold(n, d, q_new, truncation, reality, normality)
    return m, change
