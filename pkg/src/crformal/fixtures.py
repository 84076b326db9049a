"""Built-in corpus of small manifolds and maps with hand-checkable invariants.

Each case is either a verified map pair or a raw map into a target (used
when no generic source manifold exists).  The suite doubles as the
regression corpus for the acceptance tests and as the ``--fixtures`` CLI
battery.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .expr import parse_expression
from .manifold import FormalGenericSubmanifold, graph_solve, ingest
from .mapping import FormalMapPair, attach
from .series import TruncatedSeries, VariableContext, full_context, map_context, zw_context


@dataclass
class FixtureCase:
    name: str
    description: str
    pair: Optional[FormalMapPair] = None
    raw_target: Optional[FormalGenericSubmanifold] = None
    raw_map: Optional[tuple[TruncatedSeries, ...]] = None


def quadric_power(k: int, truncation: int) -> FormalGenericSubmanifold:
    """The hypersurface Im w = |z|^(2k) in C^2."""
    ctx = map_context(1, 1)
    q = parse_expression(f"wb1 + 2*i*z1^{k}*zb1^{k}", ctx, truncation)
    return FormalGenericSubmanifold.from_normal_graph(1, 1, [q], truncation)


def _pair_from_exprs(source, target, f_exprs, g_exprs, truncation, cutoff, seed):
    zw = zw_context(source.n, source.d)
    f = [parse_expression(e, zw, truncation) for e in f_exprs]
    g = [parse_expression(e, zw, truncation) for e in g_exprs]
    return attach(source, target, f, g, cutoff=cutoff, seed=seed)


def _from_defining(n, d, exprs, truncation, w_split=None):
    ctx = full_context(n, d)
    rho = [parse_expression(e, ctx, truncation) for e in exprs]
    q0 = graph_solve(rho, w_split=w_split, truncation=truncation)
    m, _ = ingest(q0, n, d, truncation)
    return m


def fixture_cases(truncation: int = 8, cutoff: int = 12, seed: int = 0) -> list[FixtureCase]:
    cases = []
    sphere = quadric_power(1, truncation)

    cases.append(
        FixtureCase(
            "identity_on_sphere_quadric",
            "identity self-map of Im w = |z|^2",
            pair=_pair_from_exprs(sphere, sphere, ["z1"], ["w1"], truncation, cutoff, seed),
        )
    )
    for k in (2, 3, 4):
        cases.append(
            FixtureCase(
                f"power_map_k{k}",
                f"(z^{k}, w) from Im w = |z|^(2*{k}) onto the sphere quadric",
                pair=_pair_from_exprs(
                    quadric_power(k, truncation),
                    sphere,
                    [f"z1^{k}"],
                    ["w1"],
                    truncation,
                    cutoff,
                    seed,
                ),
            )
        )

    # flattening projection: target Im w = Re w |z|^2 is of infinite type
    flat_target = _from_defining(
        1, 1, ["w1 - wb1 - i*(w1+wb1)*z1*zb1"], truncation
    )
    cases.append(
        FixtureCase(
            "projection_to_infinite_type",
            "(z, 0) from the sphere quadric into Im w = Re w |z|^2",
            pair=_pair_from_exprs(
                sphere, flat_target, ["z1"], ["0"], truncation, cutoff, seed
            ),
        )
    )

    # graph twist: source Im w = |z w|^2 is of infinite type
    twist_source = _from_defining(
        1, 1, ["w1 - wb1 - 2*i*z1*zb1*w1*wb1"], truncation
    )
    cases.append(
        FixtureCase(
            "twist_from_infinite_type",
            "(z w, w) from Im w = |z w|^2 onto the sphere quadric",
            pair=_pair_from_exprs(
                twist_source, sphere, ["z1*w1"], ["w1"], truncation, cutoff, seed
            ),
        )
    )

    # totally real plane R^2 in C^2: n = 0, d = 2; the slant map is
    # transversal but not CR transversal
    r2_ctx = map_context(0, 2)
    r2 = FormalGenericSubmanifold.from_normal_graph(
        0,
        2,
        [
            TruncatedSeries.variable(r2_ctx, "wb1"),
            TruncatedSeries.variable(r2_ctx, "wb2"),
        ],
        truncation,
    )
    slant_ctx = VariableContext(("z1", "z2"), ("z", "z"))
    slant = (
        parse_expression("z1", slant_ctx, truncation),
        parse_expression("i*z1", slant_ctx, truncation),
    )
    cases.append(
        FixtureCase(
            "slant_line_into_real_plane",
            "(z1, i z1) into the totally real plane R^2",
            raw_target=r2,
            raw_map=slant,
        )
    )

    # three-dimensional graph map with nonvanishing Jacobian that is not finite
    triple_source = _from_defining(
        2, 1, ["w1 - wb1 - 2*i*(z1*zb1 + z2*zb2*w1*wb1)"], truncation
    )
    triple_target_ctx = map_context(2, 1)
    triple_target = FormalGenericSubmanifold.from_normal_graph(
        2,
        1,
        [
            parse_expression(
                "wb1 + 2*i*(z1*zb1 + z2*zb2)", triple_target_ctx, truncation
            )
        ],
        truncation,
    )
    cases.append(
        FixtureCase(
            "fiber_collapse_in_c3",
            "(z1, z2 w, w) between hypersurfaces of C^3",
            pair=_pair_from_exprs(
                triple_source,
                triple_target,
                ["z1", "z2*w1"],
                ["w1"],
                truncation,
                cutoff,
                seed,
            ),
        )
    )
    return cases
