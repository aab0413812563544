#!/usr/bin/env python3
"""Runs each rmwsnap command, validates the JSON it writes against the
published schema and checks the exit-code contract."""

import argparse
import json
import subprocess
import sys
from pathlib import Path

import jsonschema


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--rmwsnap", required=True)
    ap.add_argument("--schema", required=True)
    ap.add_argument("--scenarios", required=True)
    ap.add_argument("--work", required=True)
    args = ap.parse_args()

    schema = json.loads(Path(args.schema).read_text())
    jsonschema.Draft202012Validator.check_schema(schema)
    validator = jsonschema.Draft202012Validator(schema)
    sc = Path(args.scenarios)
    work = Path(args.work)
    work.mkdir(parents=True, exist_ok=True)
    failures = []

    def run(*argv):
        return subprocess.run([args.rmwsnap, *map(str, argv)], capture_output=True, text=True).returncode

    def check(label, argv, expect_code):
        out = work / f"{label}.json"
        out.unlink(missing_ok=True)
        code = run(*argv, "--out", out)
        if code != expect_code:
            failures.append(f"{label}: exit {code}, expected {expect_code}")
            return None
        report = json.loads(out.read_text())
        errors = sorted(validator.iter_errors(report), key=lambda e: list(e.path))
        for e in errors[:5]:
            failures.append(f"{label}: {'/'.join(map(str, e.path))}: {e.message}")
        # violations = 0 <=> exit 0
        if (report["violations"] == 0) != (code == 0):
            failures.append(f"{label}: violations={report['violations']} but exit {code}")
        print(f"{label}: exit {code}, {len(errors)} schema errors")
        return report

    check("explore-clean", ["explore", sc / "n2_basic.yaml", "--mode", "exhaustive"], 0)
    check("explore-crash", ["explore", sc / "n2_crash.yaml", "--variant", "conc-lf"], 0)
    check("explore-random", ["explore", sc / "n3_bounded.yaml", "--mode", "random", "--count", "200"], 0)
    mutants = {}
    for name in ["mutant_drop_help", "mutant_weak_help", "mutant_skip_joiner"]:
        mutants[name] = check(name, ["explore", sc / f"{name}.yaml"], 1)
    check("stress", ["stress", sc / "n8_mixed.yaml", "--ops", "2000", "--seed", "1"], 0)
    check("stress-solo", ["stress", sc / "solo_stress.yaml", "--ops", "400"], 0)
    check("bench", ["bench", "--n", "2,4", "--m", "2", "--runs", "3"], 0)
    check("bench-solo", ["bench", "--n", "1", "--m", "1", "--quiescent", "--variant", "solo-wf"], 0)
    check("adversary-aba", ["adversary", "hide-aba", sc / "mutant_third_collect.yaml"], 1)
    check("adversary-joiners", ["adversary", "fresh-joiners", sc / "unbounded_fresh_joiners.yaml"], 0)
    shipped = sc / "counterexamples" / "drop_third_collect.json"
    check("replay-shipped", ["replay", shipped], 1)

    # every counterexample in a report replays to the same verdict
    for name, report in mutants.items():
        if report is None:
            continue
        for i, cx in enumerate(report["counterexamples"]):
            path = work / f"{name}-cx{i}.json"
            path.write_text(json.dumps(cx["schedule"]))
            if run("replay", path) != 1:
                failures.append(f"{name}: counterexample {i} did not replay to a violation")
            replayed = check(f"{name}-replay{i}", ["replay", path], 1)
            if replayed and cx["kind"] not in {f["kind"] for f in replayed["runs"][0]["findings"]}:
                failures.append(f"{name}: counterexample {i} replayed without a {cx['kind']} finding")
        rep = check(f"{name}-replay-all", ["replay", work / f"{name}.json"], 1)
        if rep and len(rep["runs"]) != len(report["counterexamples"]):
            failures.append(f"{name}: replayed {len(rep['runs'])} of {len(report['counterexamples'])}")

    # schedule files validate too
    errors = list(validator.iter_errors(json.loads(shipped.read_text())))
    if errors:
        failures.append(f"shipped schedule: {errors[0].message}")

    # configuration errors exit 2 and write nothing
    for label, argv in [
        ("missing", ["explore", work / "nope.yaml"]),
        ("threads", ["stress", sc / "n8_mixed.yaml", "--threads", "0"]),
        ("variant", ["explore", sc / "n2_basic.yaml", "--variant", "conc-xx"]),
        ("grid", ["bench", "--n", ""]),
    ]:
        code = run(*argv)
        if code != 2:
            failures.append(f"{label}: exit {code}, expected 2")

    for f in failures:
        print("FAIL", f)
    print("schema check:", "FAIL" if failures else "PASS")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
