"""Scenario documents and the deterministic analysis runner.

A scenario fixes dimensions, truncation, cutoff and seed, declares named
manifolds (by normal graph series Q or by a defining system plus a w
split) and named maps, and lists requested analyses.  The runner produces
a JSON-able report that is byte-stable for a fixed scenario and seed: all
randomness is seeded, all orderings are canonical.

Variable conventions: z1..zn and w1..wd are the holomorphic coordinates,
zb1..zbn and wb1..wbd their conjugate slots; the letter ``i`` is reserved
for the imaginary unit.
"""

from __future__ import annotations

import json
import zlib
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field

from . import __version__
from .errors import CrformalError, ParseError, ScenarioError
from .expr import parse_expression
from .fixtures import fixture_cases
from .manifold import FormalGenericSubmanifold, graph_solve, ingest
from .mapping import (
    FormalMapPair,
    attach,
    cr_transversal_raw,
    theorem_audit,
    transversal_raw,
)
from .series import full_context, map_context, zw_context

MANIFOLD_ANALYSES = ("finite_type", "essential_type", "finitely_nondegenerate")
MAP_ANALYSES = (
    "cr_transversal",
    "transversal",
    "not_totally_degenerate",
    "segre_finite",
    "finite",
    "transversally_regular",
    "jacobian_nonzero",
    "reflection_identities",
    "audit",
)


class ManifoldSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)
    q: Optional[list[str]] = Field(None, alias="Q")
    defining: Optional[list[str]] = None
    w_split: Optional[list[str]] = Field(None, alias="wSplit")


class MapSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)
    f: list[str] = Field(alias="F")
    g: list[str] = Field(alias="G")
    source: str
    target: str


class Scenario(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)
    n: int
    d: int
    truncation: int = 8
    cutoff: int = 12
    seed: int = 0
    manifolds: dict[str, ManifoldSpec] = Field(default_factory=dict)
    maps: dict[str, MapSpec] = Field(default_factory=dict)
    requests: list[str] = Field(default_factory=list)


def _derived_seed(base: int, label: str) -> int:
    return (base * 1000003 + zlib.crc32(label.encode())) & 0x7FFFFFFF


def _build_manifold(name: str, spec: ManifoldSpec, sc: Scenario) -> FormalGenericSubmanifold:
    path = f"manifolds.{name}"
    if (spec.q is None) == (spec.defining is None):
        raise ScenarioError(path, "exactly one of 'Q' or 'defining' is required")
    try:
        if spec.q is not None:
            if len(spec.q) != sc.d:
                raise ScenarioError(path + ".Q", f"expected {sc.d} components")
            ctx = map_context(sc.n, sc.d)
            q0 = [parse_expression(e, ctx, sc.truncation) for e in spec.q]
        else:
            if len(spec.defining) != sc.d:
                raise ScenarioError(path + ".defining", f"expected {sc.d} components")
            ctx = full_context(sc.n, sc.d)
            rho = [parse_expression(e, ctx, sc.truncation) for e in spec.defining]
            q0 = graph_solve(rho, w_split=spec.w_split, truncation=sc.truncation)
        manifold, _ = ingest(q0, sc.n, sc.d, sc.truncation)
        return manifold
    except ParseError as exc:
        raise ScenarioError(path, str(exc)) from exc
    except CrformalError as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(path, str(exc)) from exc


def _build_pair(name, spec: MapSpec, manifolds, sc: Scenario) -> FormalMapPair:
    path = f"maps.{name}"
    for role, key in (("source", spec.source), ("target", spec.target)):
        if key not in manifolds:
            raise ScenarioError(f"{path}.{role}", f"unknown manifold {key!r}")
    if len(spec.f) != sc.n or len(spec.g) != sc.d:
        raise ScenarioError(path, f"expected {sc.n} F components and {sc.d} G components")
    zw = zw_context(sc.n, sc.d)
    try:
        f = [parse_expression(e, zw, sc.truncation) for e in spec.f]
        g = [parse_expression(e, zw, sc.truncation) for e in spec.g]
        return attach(
            manifolds[spec.source],
            manifolds[spec.target],
            f,
            g,
            cutoff=sc.cutoff,
            seed=_derived_seed(sc.seed, name),
        )
    except CrformalError as exc:
        raise ScenarioError(path, str(exc)) from exc


def _requested(requests: list[str], analysis: str, target: str) -> bool:
    if not requests:
        return analysis != "audit"
    for item in requests:
        bare, _, qualifier = item.partition(":")
        if bare in ("all", analysis) and qualifier in ("", target):
            return True
    return False


def _validate_requests(requests):
    valid = set(MANIFOLD_ANALYSES) | set(MAP_ANALYSES) | {"all"}
    for k, item in enumerate(requests):
        bare = item.partition(":")[0]
        if bare not in valid:
            raise ScenarioError(
                f"requests[{k}]",
                f"unknown analysis {bare!r}; valid: {', '.join(sorted(valid))}",
            )


def manifold_report(m: FormalGenericSubmanifold, requests, name, cutoff) -> dict:
    out = {
        "n": m.n,
        "d": m.d,
        "truncation": m.truncation,
        "exact": m.exact,
        "reality": m.reality_verified.to_json(),
        "normal_form": m.normality_verified.to_json(),
    }
    if _requested(requests, "finite_type", name):
        out["finite_type"] = m.is_finite_type().to_json()
    if _requested(requests, "essential_type", name):
        out["essential_type"] = m.essential_type(cutoff).to_json()
        out["essentially_finite"] = m.essential_finiteness(cutoff).to_json()
    if _requested(requests, "finitely_nondegenerate", name):
        verdict, order = m.is_finitely_nondegenerate()
        out["finitely_nondegenerate"] = verdict.to_json()
        out["nondegeneracy_order"] = order
    return out


def map_report(pair: FormalMapPair, requests, name, audit: bool) -> tuple[dict, int]:
    out = {
        "source_n": pair.n,
        "source_d": pair.d,
        "maps_into": pair.maps_into.to_json(),
    }
    violations = 0
    if _requested(requests, "cr_transversal", name):
        out["cr_transversal"] = pair.is_cr_transversal().to_json()
    if _requested(requests, "transversal", name):
        out["transversal"] = pair.is_transversal().to_json()
    if _requested(requests, "not_totally_degenerate", name):
        out["not_totally_degenerate"] = pair.not_totally_degenerate().to_json()
    if _requested(requests, "segre_finite", name):
        verdict, m_h = pair.segre_finite()
        out["segre_finite"] = verdict.to_json()
        out["segre_multiplicity"] = m_h.to_json()
    if _requested(requests, "finite", name):
        verdict, mult = pair.finite()
        out["finite"] = verdict.to_json()
        out["multiplicity"] = mult.to_json()
    if _requested(requests, "transversally_regular", name):
        out["transversally_regular"] = pair.transversally_regular().to_json()
    if _requested(requests, "jacobian_nonzero", name):
        out["jacobian_nonzero"] = pair.jacobian_nonzero().to_json()
    if _requested(requests, "reflection_identities", name):
        refl = {}
        for k in range(1, 2 * pair.d + 3):
            verdict = pair.reflection_residual(k)
            refl[str(k)] = verdict.to_json()
            if verdict.is_false:
                violations += 1
        out["reflection_identities"] = refl
    if audit or _requested(requests, "audit", name):
        if pair.maps_into.is_true:
            report = theorem_audit(pair)
            out["audit"] = {
                "checks": report["checks"],
                "violations": report["violations"],
            }
            violations += report["violations"]
        else:
            out["audit"] = {
                "skipped": "is-mapped-into residual is not certified",
                "violations": 0,
            }
    return out, violations


def run_scenario(scenario: Scenario | dict, audit: bool = False) -> dict:
    """Execute a scenario and return the deterministic report dict."""
    if isinstance(scenario, dict):
        scenario = Scenario.model_validate(scenario)
    _validate_requests(scenario.requests)
    report = {
        "header": {
            "tool": f"crformal {__version__}",
            "n": scenario.n,
            "d": scenario.d,
            "truncation": scenario.truncation,
            "cutoff": scenario.cutoff,
            "seed": scenario.seed,
        },
        "manifolds": {},
        "maps": {},
    }
    manifolds = {}
    for name, spec in scenario.manifolds.items():
        manifolds[name] = _build_manifold(name, spec, scenario)
        report["manifolds"][name] = manifold_report(
            manifolds[name], scenario.requests, name, scenario.cutoff
        )
    violations = 0
    for name, spec in scenario.maps.items():
        pair = _build_pair(name, spec, manifolds, scenario)
        out, v = map_report(pair, scenario.requests, name, audit)
        report["maps"][name] = out
        violations += v
    report["summary"] = {
        "violations": violations,
        "exit_code": 2 if violations else 0,
    }
    return report


def run_fixtures(
    truncation: int = 8, cutoff: int = 12, seed: int = 0, audit: bool = True
) -> dict:
    """Run the built-in corpus and return its deterministic report."""
    report = {
        "header": {
            "tool": f"crformal {__version__}",
            "suite": "fixtures",
            "truncation": truncation,
            "cutoff": cutoff,
            "seed": seed,
        },
        "fixtures": {},
    }
    violations = 0
    for case in fixture_cases(truncation, cutoff, seed):
        if case.pair is not None:
            out, v = map_report(case.pair, [], case.name, audit)
            out["manifolds"] = {
                "source": manifold_report(case.pair.source, [], "source", cutoff),
                "target": manifold_report(case.pair.target, [], "target", cutoff),
            }
            violations += v
        else:
            out = {
                "cr_transversal": cr_transversal_raw(
                    case.raw_target.d, case.raw_map
                ).to_json(),
                "transversal": transversal_raw(case.raw_target.d, case.raw_map).to_json(),
                "manifolds": {
                    "target": manifold_report(case.raw_target, ["none"], "target", cutoff)
                },
            }
        out["description"] = case.description
        report["fixtures"][case.name] = out
    report["summary"] = {
        "violations": violations,
        "exit_code": 2 if violations else 0,
    }
    return report


def render_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def render_text(report: dict) -> str:
    lines = []
    header = report.get("header", {})
    lines.append(" ".join(f"{k}={v}" for k, v in sorted(header.items())))
    lines.append("")

    def verdict_line(label, v, indent="  "):
        if isinstance(v, dict) and "value" in v:
            lines.append(f"{indent}{label}: {v['value']}  [{v.get('evidence', '')}]")
        elif isinstance(v, dict) and "kind" in v:
            dim = v.get("dimension")
            detail = f"dimension {dim}" if v["kind"] == "finite" else f"cutoff {v.get('cutoff_used')}"
            lines.append(f"{indent}{label}: {v['kind']} ({detail})")

    def section(title, entries):
        for name, data in entries.items():
            lines.append(f"{title} {name}:")
            for key, value in data.items():
                if key in ("audit", "manifolds", "reflection_identities", "description"):
                    continue
                if isinstance(value, dict):
                    verdict_line(key, value)
                else:
                    lines.append(f"  {key}: {value}")
            refl = data.get("reflection_identities")
            if refl:
                summary = ", ".join(f"k={k}:{v['value']}" for k, v in sorted(refl.items(), key=lambda kv: int(kv[0])))
                lines.append(f"  reflection_identities: {summary}")
            audit = data.get("audit")
            if audit and "checks" in audit:
                lines.append(f"  audit: {audit['violations']} violated")
                for check in audit["checks"]:
                    lines.append(f"    {check['status'].upper():9s} {check['name']}: {check['detail']}")
            inner = data.get("manifolds")
            if inner:
                section(f"  manifold", inner)
            lines.append("")

    section("manifold", report.get("manifolds", {}))
    section("map", report.get("maps", {}))
    section("fixture", report.get("fixtures", {}))
    summary = report.get("summary", {})
    lines.append(f"violations: {summary.get('violations', 0)}")
    return "\n".join(lines) + "\n"
