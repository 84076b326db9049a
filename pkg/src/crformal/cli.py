"""Command line entry point: a thin client over the analysis runner.

By default the scenario runs in process (reports are byte-stable for a
fixed scenario and seed); with --server the scenario is posted to a
running service instance instead.

Exit codes: 0 all requested analyses completed with no violated checks,
1 input error, 2 violations found.
"""

from __future__ import annotations

import argparse
import json
import sys

from pydantic import ValidationError

from .errors import CrformalError, ScenarioError
from .scenario import Scenario, render_json, render_text, run_fixtures, run_scenario


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crformal",
        description="Certified invariants of formal generic submanifolds and "
        "the holomorphic map germs between them.",
    )
    parser.add_argument("scenario", nargs="?", help="scenario JSON file")
    parser.add_argument("--fixtures", action="store_true", help="run the built-in corpus")
    parser.add_argument("--audit", action="store_true", help="audit every map pair")
    parser.add_argument("--truncation", type=int, default=None, help="jet order K")
    parser.add_argument("--cutoff", type=int, default=None, help="codimension cutoff")
    parser.add_argument("--seed", type=int, default=None, help="seed for all randomness")
    parser.add_argument("--format", choices=("json", "text"), default="json")
    parser.add_argument("--output", default=None, help="write the report to a file")
    parser.add_argument("--server", default=None, help="POST to a running service URL")
    return parser


def _post(url: str, payload: dict) -> dict:
    import urllib.request

    req = urllib.request.Request(
        url,
        data=json.dumps(payload).encode(),
        headers={"Content-Type": "application/json"},
    )
    with urllib.request.urlopen(req) as response:
        return json.loads(response.read().decode())


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if bool(args.scenario) == bool(args.fixtures):
        parser.print_usage(sys.stderr)
        print("error: provide a scenario file or --fixtures (not both)", file=sys.stderr)
        return 1
    try:
        if args.fixtures:
            options = {
                "truncation": args.truncation if args.truncation is not None else 8,
                "cutoff": args.cutoff if args.cutoff is not None else 12,
                "seed": args.seed if args.seed is not None else 0,
                "audit": args.audit,
            }
            if args.server:
                report = _post(args.server.rstrip("/") + "/fixtures", options)
            else:
                report = run_fixtures(**options)
        else:
            try:
                with open(args.scenario) as handle:
                    document = json.load(handle)
            except OSError as exc:
                print(f"error: {exc}", file=sys.stderr)
                return 1
            except json.JSONDecodeError as exc:
                print(f"{args.scenario}: invalid JSON: {exc}", file=sys.stderr)
                return 1
            try:
                scenario = Scenario.model_validate(document)
            except ValidationError as exc:
                for err in exc.errors():
                    path = ".".join(str(p) for p in err["loc"])
                    print(f"{args.scenario}: {path}: {err['msg']}", file=sys.stderr)
                return 1
            overrides = {
                "truncation": args.truncation,
                "cutoff": args.cutoff,
                "seed": args.seed,
            }
            updates = {k: v for k, v in overrides.items() if v is not None}
            if updates:
                scenario = scenario.model_copy(update=updates)
            if args.server:
                report = _post(
                    args.server.rstrip("/") + "/analyze",
                    {"scenario": scenario.model_dump(by_alias=True), "audit": args.audit},
                )
            else:
                report = run_scenario(scenario, audit=args.audit)
    except ScenarioError as exc:
        where = args.scenario or "fixtures"
        print(f"{where}: {exc.path}: {exc.message}", file=sys.stderr)
        return 1
    except CrformalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    rendered = render_json(report) if args.format == "json" else render_text(report)
    if args.output:
        with open(args.output, "w") as handle:
            handle.write(rendered)
    else:
        sys.stdout.write(rendered)
    return report.get("summary", {}).get("exit_code", 0)


if __name__ == "__main__":
    sys.exit(main())
