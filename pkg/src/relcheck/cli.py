"""Command-line front end.

    relcheck check MODEL PROPS [--exact | --tolerance R] [--witness PATH]
                               [--scheduler-class {general,md}] [--json]
                               [--report-dir DIR] [--md-cap N]
    relcheck generate CASE --out DIR [--n N] [--bias-low R] [--bias-high R]
                               [--epsilon R] [--jx X --jy Y]

`check` prints one verdict line per property (Yes / No / Inconclusive) with
the achievable-value intervals, the detected fast-path class and wall-clock
time; exit status is 0 when every property was decided, 2 if any was
inconclusive and 1 on errors. `--scheduler-class md` decides the property
over memoryless deterministic schedulers by (cap-guarded) enumeration.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from fractions import Fraction

from .api import check_query
from .casestudies import generate
from .core import ExplicitMemoryScheduler, MDScheduler, MRScheduler
from .errors import RelcheckError
from .model_io import normalize, parse_model, parse_property_file, emit_model
from .oracle import oracle_holds_md
from .query import RelationalQuery
from .relreach import CheckResult, Verdict


def _scheduler_json(sched):
    if isinstance(sched, MDScheduler):
        return {
            "kind": "md",
            "choices": {str(s): str(a) for s, a in sorted(sched.choices.items(), key=lambda kv: str(kv[0]))},
        }
    if isinstance(sched, MRScheduler):
        return {
            "kind": "mr",
            "choices": {
                str(s): {str(a): str(p) for a, p in sorted(d.items(), key=lambda kv: str(kv[0]))}
                for s, d in sorted(sched.choices.items(), key=lambda kv: str(kv[0]))
            },
        }
    if isinstance(sched, ExplicitMemoryScheduler):
        return {
            "kind": "explicit-memory",
            "modes": [str(q) for q in sched.modes],
            "init": {
                str(s): {str(q): str(p) for q, p in d.items()}
                for s, d in sorted(sched.init.items(), key=lambda kv: str(kv[0]))
            },
            "act": [
                {
                    "mode": str(q),
                    "state": str(s),
                    "dist": {str(a): str(p) for a, p in d.items()},
                }
                for (q, s), d in sorted(sched.act.items(), key=lambda kv: str(kv[0]))
            ],
            "mode_update": [
                {
                    "mode": str(q),
                    "action": str(a),
                    "next_state": str(t),
                    "dist": {str(q2): str(p) for q2, p in d.items()},
                }
                for (q, a, t), d in sorted(sched.mode_update.items(), key=lambda kv: str(kv[0]))
            ],
        }
    raise TypeError(type(sched))


def _normal_form_json(query: RelationalQuery):
    return {
        "universal": query.universal,
        "schedulers": list(query.scheduler_names),
        "predicates": [
            {
                "comparison": pred.comparison,
                "bound": str(pred.bound),
                "epsilon": str(pred.epsilon),
                "operators": [
                    {
                        "coefficient": str(op.coefficient),
                        "initial_state": str(op.initial_state),
                        "scheduler": query.scheduler_name(op.scheduler),
                        "temporal": op.temporal,
                        "target": sorted(str(s) for s in op.target),
                    }
                    for op in pred.operators
                ],
            }
            for pred in query.predicates
        ],
    }


def _record(index, text, query, result: CheckResult, elapsed):
    pred = query.predicates[0] if len(query.predicates) == 1 else None
    rec = {
        "index": index,
        "property": text,
        "verdict": result.verdict.value,
        "fast_path": result.fast_path,
        "v_max_lower": None,
        "v_max_upper": None,
        "v_min_lower": None,
        "v_min_upper": None,
        "bound": str(pred.bound) if pred else None,
        "epsilon": str(pred.epsilon) if pred else None,
        "comparison": pred.comparison if pred else "conjunction",
        "time_s": round(elapsed, 4),
    }
    if result.v_max:
        rec["v_max_lower"], rec["v_max_upper"] = map(str, result.v_max)
    if result.v_min and result.v_min[0] is not None:
        rec["v_min_lower"], rec["v_min_upper"] = map(str, result.v_min)
    return rec


def cmd_check(args) -> int:
    try:
        with open(args.model, "rb") as handle:
            model = parse_model(handle.read())
        with open(args.props, "r", encoding="utf-8") as handle:
            text = handle.read()
        formulas = parse_property_file(text)
        lines = [
            line.strip()
            for line in text.splitlines()
            if line.strip() and not line.strip().startswith("#")
        ]
    except (OSError, RelcheckError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    tolerance = Fraction(0) if args.exact or args.tolerance is None else Fraction(args.tolerance)
    records = []
    reports = []
    witness_docs = {}
    any_inconclusive = False
    for index, (line, ast) in enumerate(zip(lines, formulas), start=1):
        start = time.perf_counter()
        try:
            query = normalize(ast, model.mdp, model.init)
            if args.scheduler_class == "md":
                holds, assignment = oracle_holds_md(model.mdp, query, cap=args.md_cap)
                result = CheckResult(
                    Verdict.TRUE if holds else Verdict.FALSE,
                    fast_path="md-enumeration",
                    witnesses=assignment,
                    universal=query.universal,
                )
            else:
                result = check_query(
                    model.mdp, query, tolerance, want_witness=args.witness is not None
                )
        except RelcheckError as exc:
            print(f"error: property {index}: {exc}", file=sys.stderr)
            return 1
        elapsed = time.perf_counter() - start
        rec = _record(index, line, query, result, elapsed)
        records.append(rec)
        report = {
            **rec,
            "normal_form": _normal_form_json(query),
            "note": result.note,
        }
        reports.append(report)
        if result.verdict is Verdict.INCONCLUSIVE:
            any_inconclusive = True
        if not args.json:
            intervals = ""
            if rec["v_max_lower"] is not None:
                intervals += f"  v_max in [{rec['v_max_lower']}, {rec['v_max_upper']}]"
            if rec["v_min_lower"] is not None:
                intervals += f"  v_min in [{rec['v_min_lower']}, {rec['v_min_upper']}]"
            print(
                f"Property {index}: {result.verdict.value}"
                f"  (fast-path: {result.fast_path}, {elapsed:.3f}s){intervals}"
            )
            if result.note:
                print(f"  note: {result.note}")
        if args.witness and result.witnesses:
            witness_docs[str(index)] = {
                name: _scheduler_json(s) for name, s in result.witnesses.items()
            }

    if args.json:
        print(json.dumps({"model": args.model, "properties": reports}, indent=2))
    if args.witness and witness_docs:
        with open(args.witness, "w", encoding="utf-8") as handle:
            json.dump(witness_docs, handle, indent=2)
        if not args.json:
            print(f"witnesses written to {args.witness}")
    if args.report_dir:
        from .report import write_report

        paths = write_report(records, args.report_dir)
        if not args.json:
            print("report written to " + ", ".join(paths))
    return 2 if any_inconclusive else 0


def cmd_generate(args) -> int:
    params = {}
    if args.n is not None:
        params["n"] = args.n
    if args.bias_low is not None:
        params["p_low"] = args.bias_low
    if args.bias_high is not None:
        params["p_high"] = args.bias_high
    if args.epsilon is not None:
        params["epsilon"] = args.epsilon
    if args.jx is not None:
        params["jx"], params["jy"] = args.jx, args.jy
    try:
        model, props = generate(args.case, **params)
    except RelcheckError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    os.makedirs(args.out, exist_ok=True)
    model_path = os.path.join(args.out, f"{args.case}.model.json")
    props_path = os.path.join(args.out, f"{args.case}.props")
    with open(model_path, "w", encoding="utf-8") as handle:
        handle.write(emit_model(model))
    with open(props_path, "w", encoding="utf-8") as handle:
        handle.write("\n".join(props) + "\n")
    print(f"wrote {model_path} ({len(model.mdp.states)} states) and {props_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="relcheck",
        description="Relational probabilistic model checking for MDPs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", help="check properties against a model")
    check.add_argument("model", help="model file (JSON)")
    check.add_argument("props", help="property file (one formula per line)")
    check.add_argument("--exact", action="store_true", help="exact mode (default)")
    check.add_argument("--tolerance", help="approximation tolerance (rational)")
    check.add_argument("--witness", metavar="PATH", help="write witness schedulers as JSON")
    check.add_argument(
        "--scheduler-class",
        choices=["general", "md"],
        default="general",
        help="scheduler class to decide over (md: brute-force enumeration)",
    )
    check.add_argument("--md-cap", type=int, default=10**6, help="MD enumeration cap")
    check.add_argument("--json", action="store_true", help="machine-readable report")
    check.add_argument("--report-dir", help="write results.csv and intervals.png here")
    check.set_defaults(func=cmd_check)

    gen = sub.add_parser("generate", help="write a bundled case study")
    gen.add_argument(
        "case",
        help="vn | israeli-jalfon | israeli-jalfon-asym | knuth-yao-biased | "
        "fast-dice-roller-biased | robot-tag",
    )
    gen.add_argument("--out", required=True, help="output directory")
    gen.add_argument("--n", type=int, help="size parameter N")
    gen.add_argument("--bias-low", help="lower bias endpoint (rational)")
    gen.add_argument("--bias-high", help="upper bias endpoint (rational)")
    gen.add_argument("--epsilon", help="epsilon for the dice properties")
    gen.add_argument("--jx", type=int, help="janitor start column (robot-tag)")
    gen.add_argument("--jy", type=int, help="janitor start row (robot-tag)")
    gen.set_defaults(func=cmd_generate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
