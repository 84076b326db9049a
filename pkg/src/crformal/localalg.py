"""Local-ring computations at the origin with exact certificates.

The central routine is ``codimension``: the dimension of C[[x]]/I for an
ideal presented by series generators.  Finiteness is certified by a
Nakayama-style argument: if every monomial of degree D lies in the span of
the generator multiples modulo degree D+1, then the D-th power of the
maximal ideal is contained in I in the complete local ring, and the
quotient dimension is read off from the jet row space below degree D.
All linear algebra is exact, so a Finite answer is a theorem about the
presented jets, never an approximation.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import PreconditionError, TruncationError
from .gaussian import GaussianRational
from .linalg import LinearSpan, matrix_rank
from .series import TruncatedSeries, VariableContext, evaluate, grlex_key, series_determinant

CERTIFIED_TRUE = "certified_true"
CERTIFIED_FALSE = "certified_false"
UNKNOWN = "unknown_at_truncation"


@dataclass(frozen=True)
class Verdict:
    """Three-valued certified result.

    ``certified_true`` / ``certified_false`` are sound statements about the
    true formal objects, given jet-sound inputs; ``unknown_at_truncation``
    records the cutoff or truncation that was exhausted.  When randomness
    participated, the seed is part of the verdict.
    """

    value: str
    evidence: str
    seed: Optional[int] = None

    @property
    def is_true(self) -> bool:
        return self.value == CERTIFIED_TRUE

    @property
    def is_false(self) -> bool:
        return self.value == CERTIFIED_FALSE

    @property
    def is_unknown(self) -> bool:
        return self.value == UNKNOWN

    def to_json(self) -> dict:
        out = {"value": self.value, "evidence": self.evidence}
        if self.seed is not None:
            out["seed"] = self.seed
        return out


def certified(flag: bool, evidence: str, seed: Optional[int] = None) -> Verdict:
    return Verdict(CERTIFIED_TRUE if flag else CERTIFIED_FALSE, evidence, seed)


def unknown(evidence: str, seed: Optional[int] = None) -> Verdict:
    return Verdict(UNKNOWN, evidence, seed)


@dataclass(frozen=True)
class CodimensionResult:
    """Outcome of a codimension computation.

    ``finite`` distinguishes a certified Finite answer from NotFiniteUpTo
    (the cutoff was exhausted without a certificate, which proves nothing
    about the true codimension).  ``exact`` records whether every generator
    was an exact polynomial; only then is the dimension a statement about
    the generators themselves rather than about their stored jets.
    """

    finite: bool
    dimension: Optional[int]
    certificate_degree: Optional[int]
    cutoff_used: int
    standard_monomials: Optional[tuple[str, ...]]
    exact: bool

    def as_verdict(self, subject: str) -> Verdict:
        if self.finite:
            return certified(
                True,
                f"{subject} has finite codimension {self.dimension} "
                f"(certificate at degree {self.certificate_degree})",
            )
        return unknown(f"{subject}: no finite certificate up to cutoff {self.cutoff_used}")

    def to_json(self) -> dict:
        return {
            "kind": "finite" if self.finite else "not_finite_up_to",
            "dimension": self.dimension,
            "certificate_degree": self.certificate_degree,
            "cutoff_used": self.cutoff_used,
            "standard_monomials": list(self.standard_monomials or []),
            "exact": self.exact,
        }


def _monomials_of_degree(nvars: int, degree: int):
    if nvars == 0:
        if degree == 0:
            yield ()
        return
    if nvars == 1:
        yield (degree,)
        return
    for head in range(degree, -1, -1):
        for tail in _monomials_of_degree(nvars - 1, degree - head):
            yield (head,) + tail


def monomial_basis(nvars: int, max_degree: int) -> list[tuple[int, ...]]:
    """All exponent tuples of total degree <= max_degree in graded-lex order."""
    out = []
    for deg in range(max_degree + 1):
        out.extend(sorted(_monomials_of_degree(nvars, deg)))
    return out


def _validated_generators(generators: Sequence[TruncatedSeries]):
    gens = []
    ctx = None
    for g in generators:
        if ctx is None:
            ctx = g.context
        elif g.context != ctx:
            raise PreconditionError("ideal generators must share one context")
        if g.is_zero():
            continue
        if not g.constant_term().is_zero():
            raise PreconditionError("ideal generators must vanish at the origin")
        gens.append(g)
    return ctx, gens


def codimension(
    generators: Sequence[TruncatedSeries],
    cutoff: int,
    context: Optional[VariableContext] = None,
) -> CodimensionResult:
    """Dimension of C[[x]]/I with a termination certificate.

    One incremental exact elimination over the monomials of degree <=
    cutoff, with rows the generator multiples m*g truncated there and
    pivots on initial monomials, computes the initial ideal layer by layer.
    Once every monomial of some degree D is an initial monomial, the D-th
    power of the maximal ideal lies in I (Nakayama in the complete local
    ring) and the quotient dimension is the number of standard (non-initial)
    monomials below degree D.  Jet generators must be stored at least
    through degree ``cutoff`` (raises ``TruncationError`` otherwise);
    callers with shallower jets clamp the cutoff and report it.
    """
    if cutoff < 1:
        raise PreconditionError("cutoff must be at least 1")
    ctx, gens = _validated_generators(generators)
    if ctx is None:
        ctx = context
    if ctx is None:
        raise PreconditionError("empty presentation needs an explicit context")
    exact = all(g.is_exact for g in gens)
    for g in gens:
        if g.truncation is not None and g.truncation < cutoff:
            raise TruncationError(
                f"codimension at cutoff {cutoff} requires generator jets of "
                f"order >= {cutoff}, got {g.truncation}"
            )
    nvars = len(ctx)
    if not gens:
        return CodimensionResult(False, None, None, cutoff, None, exact)
    if nvars == 0:
        # C itself; a nonzero "generator" cannot vanish at the origin, so
        # the only reachable presentation here is the zero ideal.
        return CodimensionResult(True, 1, 1, cutoff, ("1",), exact)

    from .expr import format_monomial

    basis = monomial_basis(nvars, cutoff)
    col = {m: k for k, m in enumerate(basis)}
    layer_cols = {}
    for m in basis:
        layer_cols.setdefault(sum(m), set()).add(col[m])
    span = LinearSpan()
    gen_data = [(list(g.terms.items()), g.order()) for g in gens]

    for d_cert in range(1, cutoff + 1):
        # insert every generator multiple whose initial degree is d_cert
        for terms, order in gen_data:
            shift_deg = d_cert - order
            if shift_deg < 0:
                continue
            for shift in _monomials_of_degree(nvars, shift_deg):
                vec = {}
                for mono, coeff in terms:
                    tot = tuple(a + b for a, b in zip(mono, shift))
                    if sum(tot) <= cutoff:
                        c = col[tot]
                        cur = vec.get(c)
                        vec[c] = coeff if cur is None else cur + coeff
                span.add(vec)
        pivots = span.pivot_columns()
        if layer_cols[d_cert] <= pivots:
            standard = [
                m for m in basis if sum(m) < d_cert and col[m] not in pivots
            ]
            return CodimensionResult(
                True,
                len(standard),
                d_cert,
                cutoff,
                tuple(format_monomial(ctx, m) for m in standard),
                exact,
            )
    return CodimensionResult(False, None, None, cutoff, None, exact)


def codimension_clamped(
    generators: Sequence[TruncatedSeries],
    cutoff: int,
    context: Optional[VariableContext] = None,
) -> CodimensionResult:
    """``codimension`` with the cutoff clamped to the shallowest generator jet.

    The clamp is visible in ``cutoff_used``; a clamp to 0 means the jets
    carry no usable information and the result is NotFiniteUpTo(0).
    """
    jet_floor = min(
        (g.truncation for g in generators if g.truncation is not None),
        default=math.inf,
    )
    cutoff_eff = int(min(cutoff, jet_floor)) if jet_floor is not math.inf else cutoff
    if cutoff_eff < 1:
        exact = all(g.is_exact for g in generators)
        return CodimensionResult(False, None, None, 0, None, exact)
    return codimension(generators, cutoff_eff, context)


# -- generic rank ---------------------------------------------------------


def _entry_matrix(rows):
    ctx = None
    exact = True
    for row in rows:
        for s in row:
            if ctx is None:
                ctx = s.context
            elif s.context != ctx:
                raise PreconditionError("matrix entries must share one context")
            exact = exact and s.is_exact
    return ctx, exact


def _random_point(ctx, rng, bound):
    from fractions import Fraction

    point = {}
    for name in ctx.names:
        num = rng.randint(-bound, bound)
        den = rng.randint(1, bound)
        point[name] = GaussianRational(Fraction(num, den))
    return point


def evaluation_rank(rows, seed: int = 0, trials: int = 4, bound: int = 7) -> int:
    """Best exact rank of the entry polynomials over seeded rational points.

    Each achieved rank is a certified lower bound for the generic rank when
    the entries are exact polynomials; for jets it is a heuristic only.
    """
    ctx, _ = _entry_matrix(rows)
    if ctx is None or not rows or not rows[0]:
        return 0
    rng = random.Random(seed)
    best = 0
    for _ in range(trials):
        point = _random_point(ctx, rng, bound)
        numeric = [[evaluate(s, point) for s in row] for row in rows]
        best = max(best, matrix_rank(numeric))
        if best == min(len(rows), len(rows[0])):
            break
    return best


def symbolic_rank_at_least(rows, j: int):
    """Search for a nonzero j x j minor; returns the witness index pair or None."""
    m = len(rows)
    l = len(rows[0]) if rows else 0
    if j == 0:
        return ((), ())
    if j > min(m, l):
        return None
    for row_ids in itertools.combinations(range(m), j):
        for col_ids in itertools.combinations(range(l), j):
            sub = [[rows[r][c] for c in col_ids] for r in row_ids]
            if not series_determinant(sub).is_zero():
                return (row_ids, col_ids)
    return None


def generic_rank(
    rows,
    target: Optional[int] = None,
    seed: int = 0,
    trials: int = 4,
    bound: int = 7,
    exhaustive_limit: int = 6,
):
    """Certified lower bound for the rank of a series matrix over the
    fraction field, plus a verdict on reaching ``target`` (the full rank
    min(shape) by default).

    A nonzero truncated minor certifies rank >= j even for jets.  For exact
    entries there is a fast path: exact rank at seeded rational points is a
    certified lower bound.  ``certified_false`` is only possible when the
    deficiency is provable: the target exceeds the shape, or all target-size
    minors of an exact matrix vanish identically.
    """
    m = len(rows)
    l = len(rows[0]) if rows else 0
    rmax = min(m, l)
    if target is None:
        target = rmax
    ctx, exact = _entry_matrix(rows)
    if target > rmax:
        return 0 if rmax == 0 else _lower_bound(rows, rmax, seed, trials, bound), certified(
            False, f"target rank {target} exceeds matrix shape {m}x{l}", seed
        )
    if target == 0:
        return 0, certified(True, "rank 0 is trivial", seed)

    if exact:
        best = evaluation_rank(rows, seed=seed, trials=trials, bound=bound)
        if best >= target:
            return best, certified(
                True, f"rank {best} certified at a seeded rational point", seed
            )
    witness = symbolic_rank_at_least(rows, target) if target <= exhaustive_limit else None
    if witness is not None:
        return target, certified(
            True,
            f"nonzero {target}x{target} minor at rows {list(witness[0])} "
            f"cols {list(witness[1])}",
            seed,
        )
    lower = _lower_bound(rows, target - 1, seed, trials, bound)
    if target > exhaustive_limit:
        return lower, unknown(
            f"no certificate found: target {target} exceeds the symbolic "
            f"fallback bound {exhaustive_limit}",
            seed,
        )
    if exact:
        return lower, certified(
            False, f"all {target}x{target} minors vanish identically", seed
        )
    return lower, unknown(
        f"all {target}x{target} minors vanish at the stored truncation", seed
    )


def _lower_bound(rows, start: int, seed: int, trials: int, bound: int) -> int:
    for j in range(start, 0, -1):
        if symbolic_rank_at_least(rows, j) is not None:
            return j
    return 0


# -- probabilistic Krull dimension ----------------------------------------


def local_dimension_is(
    generators: Sequence[TruncatedSeries],
    expected: int,
    context: Optional[VariableContext] = None,
    trials: int = 4,
    cutoff: int = 12,
    bound: int = 7,
    seed: int = 0,
) -> Verdict:
    """Test dim C[[x]]/I == expected by generic linear sections.

    Adjoining ``expected`` generic linear forms to a dimension-``expected``
    quotient makes it finite; with one form fewer it stays infinite.  A
    Finite outcome with e forms certifies dim <= e unconditionally, so the
    CertifiedFalse branch is sound; the CertifiedTrue branch additionally
    believes the (seeded, recorded) generic sections, which is correct with
    probability 1 but not a proof — the evidence says so.
    """
    ctx, gens = _validated_generators(generators)
    if ctx is None:
        ctx = context
    if ctx is None:
        raise PreconditionError("empty presentation needs an explicit context")
    nvars = len(ctx)
    if expected > nvars:
        raise PreconditionError("expected dimension exceeds the number of variables")
    if not gens:
        return certified(
            expected == nvars,
            f"zero ideal: the dimension is exactly the ambient {nvars}",
            seed,
        )
    jet_floor = min(
        (g.truncation for g in gens if g.truncation is not None), default=math.inf
    )
    cutoff_eff = int(min(cutoff, jet_floor)) if jet_floor is not math.inf else cutoff
    if cutoff_eff < 1:
        return unknown("generator jets too shallow for any section test", seed)
    rng = random.Random(seed)

    def random_forms(count):
        forms = []
        for _ in range(count):
            while True:
                coeffs = [rng.randint(-bound, bound) for _ in range(nvars)]
                if any(coeffs):
                    break
            terms = {}
            for k, c in enumerate(coeffs):
                if c:
                    mono = [0] * nvars
                    mono[k] = 1
                    terms[tuple(mono)] = GaussianRational(c)
            forms.append(TruncatedSeries(ctx, None, terms))
        return forms

    finite_with_expected = False
    for _ in range(trials):
        res = codimension(gens + random_forms(expected), cutoff_eff, ctx)
        if res.finite:
            finite_with_expected = True
            break
    if expected >= 1:
        for _ in range(trials):
            res = codimension(gens + random_forms(expected - 1), cutoff_eff, ctx)
            if res.finite:
                return certified(
                    False,
                    f"finite codimension already with {expected - 1} generic "
                    f"sections, so the dimension is below {expected}",
                    seed,
                )
    elif finite_with_expected:
        return certified(True, "finite codimension with no sections: dimension 0", seed)
    if finite_with_expected:
        return certified(
            True,
            f"dimension {expected} supported by {trials} seeded generic-section "
            f"trials at cutoff {cutoff_eff} (probabilistic: generic sections "
            "are believed generic)",
            seed,
        )
    return unknown(
        f"generic-section trials inconclusive up to cutoff {cutoff_eff}", seed
    )
