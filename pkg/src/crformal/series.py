"""Sparse truncated multivariate formal power series over the Gaussian rationals.

A series is a finite map from exponent tuples to nonzero coefficients,
together with a truncation order K or the Exact marker (``truncation is
None``) meaning the series is a polynomial stored in full.  Truncated
operations are jet-sound: the retained terms of any result are the true
terms of the ideal (untruncated) result through the result's truncation.

Monomial comparison is graded lexicographic (total degree first, then the
exponent tuple) everywhere, so every printed or serialized term list is
byte-stable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

from .errors import (
    PreconditionError,
    SingularLinearPartError,
    StructuralError,
    TruncationError,
)
from .gaussian import ONE, ZERO, GaussianRational


@dataclass(frozen=True)
class VariableContext:
    """An ordered, fixed set of variable names with per-variable role tags.

    Roles are plain strings ("z", "w", "chi", "tau" or "t1", "t2", ... for
    the blocks of iterated parametrizations); exponent tuples of every
    series index into ``names`` positionally.
    """

    names: tuple[str, ...]
    roles: tuple[str, ...]
    _index: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if len(self.names) != len(self.roles):
            raise StructuralError("names and roles must have equal length")
        if len(set(self.names)) != len(self.names):
            raise StructuralError("variable names must be unique")
        if "i" in self.names:
            raise StructuralError("'i' is reserved for the imaginary unit")
        self._index.update({n: k for k, n in enumerate(self.names)})

    def __len__(self):
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise StructuralError(f"unknown variable {name!r} in context {self.names}") from None

    def indices_with_role(self, role: str) -> list[int]:
        return [k for k, r in enumerate(self.roles) if r == role]

    def names_with_role(self, role: str) -> list[str]:
        return [n for n, r in zip(self.names, self.roles) if r == role]


def map_context(n: int, d: int) -> VariableContext:
    """Context (z_1..z_n, zb_1..zb_n, wb_1..wb_d) for graph series Q(z, chi, tau)."""
    names = tuple(f"z{i}" for i in range(1, n + 1)) + tuple(
        f"zb{i}" for i in range(1, n + 1)
    ) + tuple(f"wb{j}" for j in range(1, d + 1))
    roles = ("z",) * n + ("chi",) * n + ("tau",) * d
    return VariableContext(names, roles)


def zw_context(n: int, d: int) -> VariableContext:
    """Holomorphic coordinate context (z_1..z_n, w_1..w_d)."""
    names = tuple(f"z{i}" for i in range(1, n + 1)) + tuple(f"w{j}" for j in range(1, d + 1))
    roles = ("z",) * n + ("w",) * d
    return VariableContext(names, roles)


def full_context(n: int, d: int) -> VariableContext:
    """Context (z, w, zb, wb) for defining series rho(Z, zeta)."""
    names = (
        tuple(f"z{i}" for i in range(1, n + 1))
        + tuple(f"w{j}" for j in range(1, d + 1))
        + tuple(f"zb{i}" for i in range(1, n + 1))
        + tuple(f"wb{j}" for j in range(1, d + 1))
    )
    roles = ("z",) * n + ("w",) * d + ("chi",) * n + ("tau",) * d
    return VariableContext(names, roles)


def chi_context(n: int) -> VariableContext:
    names = tuple(f"zb{i}" for i in range(1, n + 1))
    return VariableContext(names, ("chi",) * n)


def segre_context(n: int, k: int) -> VariableContext:
    """Context (t^1, ..., t^k), each block of n variables t{j}_{i}."""
    names = []
    roles = []
    for j in range(1, k + 1):
        for i in range(1, n + 1):
            names.append(f"t{j}_{i}")
            roles.append(f"t{j}")
    return VariableContext(tuple(names), tuple(roles))


def grlex_key(mono: tuple[int, ...]):
    return (sum(mono), mono)


def _coerce_coeff(value) -> GaussianRational:
    if isinstance(value, GaussianRational):
        return value
    if isinstance(value, (int, Fraction)):
        return GaussianRational(value)
    raise TypeError(f"cannot use {type(value).__name__} as a coefficient")


class TruncatedSeries:
    """A sparse formal power series jet.

    ``truncation`` is an int K (terms of total degree > K are dropped and
    unknown) or None for an exactly represented polynomial.  Instances are
    immutable after construction and safe to share between threads.
    """

    __slots__ = ("context", "truncation", "terms")

    def __init__(self, context: VariableContext, truncation: Optional[int], terms: Mapping):
        if truncation is not None and truncation < 0:
            raise ValueError("truncation must be nonnegative")
        clean = {}
        nvars = len(context)
        for mono, coeff in terms.items():
            if len(mono) != nvars:
                raise StructuralError("exponent tuple does not match context")
            coeff = _coerce_coeff(coeff)
            if coeff.is_zero():
                continue
            if truncation is not None and sum(mono) > truncation:
                continue
            clean[mono] = coeff
        object.__setattr__(self, "context", context)
        object.__setattr__(self, "truncation", truncation)
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, *args):
        raise AttributeError("TruncatedSeries is immutable")

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls, context, truncation=None):
        return cls(context, truncation, {})

    @classmethod
    def constant(cls, context, value, truncation=None):
        z = (0,) * len(context)
        return cls(context, truncation, {z: _coerce_coeff(value)})

    @classmethod
    def variable(cls, context, name, truncation=None):
        mono = [0] * len(context)
        mono[context.index(name)] = 1
        return cls(context, truncation, {tuple(mono): ONE})

    @classmethod
    def from_terms(cls, context, pairs: Iterable, truncation=None):
        acc = {}
        for mono, coeff in pairs:
            mono = tuple(mono)
            acc[mono] = acc.get(mono, ZERO) + _coerce_coeff(coeff)
        return cls(context, truncation, acc)

    # -- inspection ----------------------------------------------------

    @property
    def is_exact(self) -> bool:
        return self.truncation is None

    def is_zero(self) -> bool:
        return not self.terms

    def order(self):
        """Minimum total degree of a stored term; +inf for the zero series."""
        if not self.terms:
            return math.inf
        return min(sum(m) for m in self.terms)

    def degree(self):
        """Maximum stored total degree; -inf for the zero series."""
        if not self.terms:
            return -math.inf
        return max(sum(m) for m in self.terms)

    def coefficient(self, mono) -> GaussianRational:
        return self.terms.get(tuple(mono), ZERO)

    def constant_term(self) -> GaussianRational:
        return self.terms.get((0,) * len(self.context), ZERO)

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda kv: grlex_key(kv[0]))

    # -- ring operations -----------------------------------------------

    def _check_context(self, other):
        if self.context != other.context:
            raise StructuralError("series live in different variable contexts")

    def _coerce_operand(self, other):
        if isinstance(other, TruncatedSeries):
            self._check_context(other)
            return other
        if isinstance(other, (int, Fraction, GaussianRational)):
            return TruncatedSeries.constant(self.context, other, None)
        return None

    def __add__(self, other):
        other = self._coerce_operand(other)
        if other is None:
            return NotImplemented
        trunc = _min_trunc(self.truncation, other.truncation)
        acc = dict(self.terms)
        for mono, coeff in other.terms.items():
            cur = acc.get(mono)
            acc[mono] = coeff if cur is None else cur + coeff
        return TruncatedSeries(self.context, trunc, acc)

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries(
            self.context, self.truncation, {m: -c for m, c in self.terms.items()}
        )

    def __sub__(self, other):
        other = self._coerce_operand(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, GaussianRational)):
            c = _coerce_coeff(other)
            if c.is_zero():
                return TruncatedSeries.zero(self.context, self.truncation)
            return TruncatedSeries(
                self.context, self.truncation, {m: v * c for m, v in self.terms.items()}
            )
        other = self._coerce_operand(other)
        if other is None:
            return NotImplemented
        trunc = _min_trunc(self.truncation, other.truncation)
        cap = math.inf if trunc is None else trunc
        left = sorted(((sum(m), m, c) for m, c in self.terms.items()))
        right = sorted(((sum(m), m, c) for m, c in other.terms.items()))
        if not left or not right:
            return TruncatedSeries.zero(self.context, trunc)
        # accumulate on raw integer triples (re, im, den); one normalization
        # per output coefficient instead of one per term pair
        acc: dict[tuple, list] = {}
        min_right = right[0][0]
        for d1, m1, c1 in left:
            if d1 + min_right > cap:
                break
            a1, b1, n1 = c1.a, c1.b, c1.den
            for d2, m2, c2 in right:
                if d1 + d2 > cap:
                    break
                mono = tuple(map(int.__add__, m1, m2))
                pa = a1 * c2.a - b1 * c2.b
                pb = a1 * c2.b + b1 * c2.a
                pd = n1 * c2.den
                cur = acc.get(mono)
                if cur is None:
                    acc[mono] = [pa, pb, pd]
                elif cur[2] == pd:
                    cur[0] += pa
                    cur[1] += pb
                else:
                    cur[0] = cur[0] * pd + pa * cur[2]
                    cur[1] = cur[1] * pd + pb * cur[2]
                    cur[2] = cur[2] * pd
        terms = {}
        for mono, (a, b, den) in acc.items():
            if a or b:
                terms[mono] = GaussianRational._raw(a, b, den)
        return _fast_series(self.context, trunc, terms)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("series exponent must be a nonnegative integer")
        out = TruncatedSeries.constant(self.context, ONE, self.truncation)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base if n > 1 else base
            n >>= 1
        return out

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return (
            self.context == other.context
            and self.truncation == other.truncation
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.context.names, self.truncation, frozenset(self.terms.items())))

    # -- structure-changing operations ----------------------------------

    def conjugate(self):
        """Conjugate every coefficient; monomials and exactness are unchanged."""
        return TruncatedSeries(
            self.context, self.truncation, {m: c.conjugate() for m, c in self.terms.items()}
        )

    def differentiate(self, name: str):
        """Partial derivative.  A degree-K jet only determines the derivative
        through degree K-1, so the truncation drops by one."""
        if self.truncation is not None and self.truncation < 1:
            raise TruncationError("cannot differentiate a jet of order 0")
        idx = self.context.index(name)
        acc = {}
        for mono, coeff in self.terms.items():
            e = mono[idx]
            if e == 0:
                continue
            m2 = mono[:idx] + (e - 1,) + mono[idx + 1 :]
            acc[m2] = acc.get(m2, ZERO) + coeff * e
        trunc = None if self.truncation is None else self.truncation - 1
        return TruncatedSeries(self.context, trunc, acc)

    def truncate(self, truncation: int):
        """Forget terms beyond ``truncation`` and mark the jet accordingly."""
        trunc = _min_trunc(self.truncation, truncation)
        return TruncatedSeries(self.context, trunc, self.terms)

    def map_context(self, new_context: VariableContext, name_map: Optional[Mapping] = None):
        """Transport the series to another context by renaming variables.

        Variables not mentioned in ``name_map`` keep their name.  Every
        variable actually used by a term must land in ``new_context``.
        """
        name_map = dict(name_map or {})
        positions = []
        for k, name in enumerate(self.context.names):
            target = name_map.get(name, name)
            if target in new_context._index:
                positions.append(new_context.index(target))
            else:
                positions.append(None)
        width = len(new_context)
        acc = {}
        for mono, coeff in self.terms.items():
            out = [0] * width
            for k, e in enumerate(mono):
                if e == 0:
                    continue
                pos = positions[k]
                if pos is None:
                    raise StructuralError(
                        f"variable {self.context.names[k]!r} is used but absent "
                        "from the target context"
                    )
                out[pos] = e
            acc[tuple(out)] = coeff
        return TruncatedSeries(new_context, self.truncation, acc)

    def __repr__(self):
        from .expr import format_series

        tag = "exact" if self.is_exact else f"K={self.truncation}"
        return f"<series {format_series(self)} [{tag}]>"


def _min_trunc(a: Optional[int], b: Optional[int]) -> Optional[int]:
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def _fast_series(context, truncation, clean_terms):
    """Internal constructor for terms already pruned and within truncation."""
    s = object.__new__(TruncatedSeries)
    object.__setattr__(s, "context", context)
    object.__setattr__(s, "truncation", truncation)
    object.__setattr__(s, "terms", clean_terms)
    return s


# -- composition --------------------------------------------------------


def compose(
    f: TruncatedSeries,
    substitution: Mapping[str, TruncatedSeries],
    target_context: Optional[VariableContext] = None,
) -> TruncatedSeries:
    """Substitute series for the variables of ``f``.

    Every substituted series must have zero constant term (formal
    composition is undefined otherwise) and all must share one target
    context.  Variables of ``f`` that are not keys of ``substitution`` are
    mapped to the same-named variable of the target context.  Monomials of
    ``f`` whose minimum achievable order already exceeds the result
    truncation are skipped before any arithmetic happens.
    """
    for name in substitution:
        f.context.index(name)
    if target_context is None:
        for s in substitution.values():
            target_context = s.context
            break
        else:
            target_context = f.context
    subs = []
    trunc = f.truncation
    for name in f.context.names:
        s = substitution.get(name)
        if s is None:
            s = TruncatedSeries.variable(target_context, name)
        else:
            if s.context != target_context:
                raise StructuralError("substituted series must share one context")
            if not s.constant_term().is_zero():
                raise PreconditionError(
                    f"substitution for {name!r} has a nonzero constant term"
                )
            trunc = _min_trunc(trunc, s.truncation)
        subs.append(s)

    cap = math.inf if trunc is None else trunc
    orders = [s.order() for s in subs]
    one = TruncatedSeries.constant(target_context, ONE, trunc)
    pow_cache: dict[tuple[int, int], TruncatedSeries] = {}

    def power(var_idx: int, e: int) -> TruncatedSeries:
        if e == 0:
            return one
        key = (var_idx, e)
        got = pow_cache.get(key)
        if got is None:
            got = power(var_idx, e - 1) * subs[var_idx]
            pow_cache[key] = got
        return got

    acc: dict[tuple, list] = {}
    for mono, coeff in f.terms.items():
        floor = 0
        skip = False
        for e, o in zip(mono, orders):
            if e == 0:
                continue
            if o is math.inf:
                skip = True
                break
            floor += e * o
            if floor > cap:
                skip = True
                break
        if skip:
            continue
        factors = [power(var_idx, e) for var_idx, e in enumerate(mono) if e]
        factors.sort(key=lambda s: len(s.terms))
        prod = one
        for p in factors:
            prod = prod * p
        ca, cb, cd = coeff.a, coeff.b, coeff.den
        for m, c in prod.terms.items():
            pa = ca * c.a - cb * c.b
            pb = ca * c.b + cb * c.a
            pd = cd * c.den
            cur = acc.get(m)
            if cur is None:
                acc[m] = [pa, pb, pd]
            elif cur[2] == pd:
                cur[0] += pa
                cur[1] += pb
            else:
                cur[0] = cur[0] * pd + pa * cur[2]
                cur[1] = cur[1] * pd + pb * cur[2]
                cur[2] = cur[2] * pd
    terms = {}
    for m, (a, b, den) in acc.items():
        if a or b:
            terms[m] = GaussianRational._raw(a, b, den)
    return _fast_series(target_context, trunc, terms)


def invert_unit(f: TruncatedSeries, truncation: Optional[int] = None) -> TruncatedSeries:
    """Multiplicative inverse of a series with nonzero constant term.

    The result is a jet: exactness never survives inversion, so a finite
    working truncation is required (taken from ``f`` when it has one).
    """
    c = f.constant_term()
    if c.is_zero():
        raise PreconditionError("cannot invert a series with zero constant term")
    trunc = f.truncation if f.truncation is not None else truncation
    if trunc is None:
        raise TruncationError("inverting an exact polynomial requires a truncation")
    trunc = _min_trunc(f.truncation, trunc)
    cinv = c.inverse()
    h = TruncatedSeries.constant(f.context, ONE, trunc) - f.truncate(trunc) * cinv
    out = TruncatedSeries.constant(f.context, ONE, trunc)
    p = TruncatedSeries.constant(f.context, ONE, trunc)
    for _ in range(trunc):
        p = p * h
        if p.is_zero():
            break
        out = out + p
    return out * cinv


def reverse(
    system: Sequence[TruncatedSeries],
    invert_names: Sequence[str],
    truncation: Optional[int] = None,
) -> list[TruncatedSeries]:
    """Formal inverse of a square system in the variables ``invert_names``.

    Extra context variables are parameters and are carried through: the
    returned series G satisfy  system(u -> G(u, p), p) = u  identically in
    the parameters, through the working truncation.  The linear part in the
    inverted variables must be invertible over the coefficient field.  Like
    unit inversion, reversion always returns jets.
    """
    from .linalg import invert_matrix

    if not system:
        raise PreconditionError("cannot reverse an empty system")
    ctx = system[0].context
    m = len(system)
    if len(invert_names) != m:
        raise PreconditionError("system must be square in the inverted variables")
    for s in system:
        if s.context != ctx:
            raise StructuralError("system series must share one context")
        if not s.constant_term().is_zero():
            raise PreconditionError("system must vanish at the origin")
    trunc = truncation
    for s in system:
        trunc = _min_trunc(trunc, s.truncation)
    if trunc is None:
        raise TruncationError("reversing an exact system requires a truncation")

    inv_idx = [ctx.index(name) for name in invert_names]
    unit_monos = []
    for idx in inv_idx:
        mono = [0] * len(ctx)
        mono[idx] = 1
        unit_monos.append(tuple(mono))
    L = [[system[i].coefficient(um) for um in unit_monos] for i in range(m)]
    try:
        Linv = invert_matrix(L)
    except SingularLinearPartError:
        raise SingularLinearPartError(
            "linear part in the inverted variables is singular"
        ) from None

    uvars = [TruncatedSeries.variable(ctx, name, trunc) for name in invert_names]
    remainder = []
    for i, s in enumerate(system):
        r = s.truncate(trunc)
        for j, um in enumerate(unit_monos):
            c = L[i][j]
            if not c.is_zero():
                r = r - uvars[j] * c
        remainder.append(r)

    def linv_apply(vec):
        out = []
        for i in range(m):
            s = TruncatedSeries.zero(ctx, trunc)
            for j in range(m):
                c = Linv[i][j]
                if not c.is_zero():
                    s = s + vec[j] * c
            out.append(s)
        return out

    g = linv_apply(uvars)
    for _ in range(trunc + 1):
        sub = {name: g[j] for j, name in enumerate(invert_names)}
        rc = [compose(r, sub, ctx) for r in remainder]
        new_g = linv_apply([uvars[j] - rc[j] for j in range(m)])
        if all(new_g[j].terms == g[j].terms for j in range(m)):
            g = new_g
            break
        g = new_g
    return g


# -- matrices of series --------------------------------------------------


def jacobian(series_list: Sequence[TruncatedSeries], names: Sequence[str]):
    """Rows = series, columns = partial derivatives with respect to ``names``."""
    return [[s.differentiate(n) for n in names] for s in series_list]


def series_determinant(rows, size_bound: int = 8) -> TruncatedSeries:
    """Determinant of a square series matrix by cofactor expansion.

    Minor determinants are memoized on (row set, column set); matrices
    larger than ``size_bound`` are rejected (generic rank questions on big
    matrices go through evaluation instead).
    """
    n = len(rows)
    if n == 0:
        raise PreconditionError("determinant of an empty matrix is undefined")
    for row in rows:
        if len(row) != n:
            raise StructuralError("determinant requires a square matrix")
    if n > size_bound:
        raise PreconditionError(
            f"cofactor expansion limited to size {size_bound}, got {n}"
        )
    ctx = rows[0][0].context
    memo: dict[tuple, TruncatedSeries] = {}

    def minor(row_ids: tuple, col_ids: tuple) -> TruncatedSeries:
        if len(row_ids) == 1:
            return rows[row_ids[0]][col_ids[0]]
        key = (row_ids, col_ids)
        got = memo.get(key)
        if got is not None:
            return got
        i = row_ids[0]
        rest = row_ids[1:]
        acc = TruncatedSeries.zero(ctx)
        for pos, j in enumerate(col_ids):
            entry = rows[i][j]
            if entry.is_zero():
                continue
            sub = minor(rest, col_ids[:pos] + col_ids[pos + 1 :])
            term = entry * sub
            acc = acc - term if pos % 2 else acc + term
        memo[key] = acc
        return acc

    ids = tuple(range(n))
    return minor(ids, ids)


def evaluate(f: TruncatedSeries, point: Mapping[str, GaussianRational]) -> GaussianRational:
    """Evaluate the stored terms at a rational point (no tail estimate)."""
    vals = [point[name] for name in f.context.names]
    total = ZERO
    for mono, coeff in f.terms.items():
        v = coeff
        for x, e in zip(vals, mono):
            if e:
                v = v * x**e
        total = total + v
    return total
