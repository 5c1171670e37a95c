#!/usr/bin/env python3
"""Run the CLI over every command and validate the JSON it emits."""

import json
import subprocess
import sys
import tempfile
from pathlib import Path

import jsonschema

RUNS = [
    ["analyze", "ode", "--preset", "logistic", "--range", "-0.5", "1.5"],
    ["analyze", "ode", "--preset", "zero", "--u0", "1,2"],
    ["analyze", "map", "--preset", "exDP1", "--horizon", "5000"],
    ["analyze", "ode", "--f", "x^2", "--tau", "1", "--u0", "1", "--horizon", "50"],
    ["fixed-points", "ode", "--preset", "logistic"],
    ["fixed-points", "ode", "--f", "x-x", "--tau", "1", "--range", "0", "1", "--grid", "64"],
    ["chain", "--f", "x/2", "--range", "0", "1", "--grid", "101", "--subset", "0", "0.02"],
    ["chain", "ode", "--preset", "logistic", "--grid", "41", "--eps", "0.01", "--n-max", "5"],
    ["bebutov", "--phi", "const:0", "--psi", "const:0.25"],
    ["bebutov", "--phi", "expr:sin(t)", "--psi", "const:0", "--domain", "half", "--eps", "0.5"],
    ["bebutov", "--phi", "expr:t", "--psi", "const:0", "--domain", "integers", "--window", "10", "--step", "1"],
]


def main() -> int:
    cli, schema_path = sys.argv[1], sys.argv[2]
    schema = json.loads(Path(schema_path).read_text())
    validator = jsonschema.Draft202012Validator(schema)
    failures = 0
    with tempfile.TemporaryDirectory() as tmp:
        listing = Path(tmp) / "presets.json"
        runs = RUNS + [["preset", "list", "--report", str(listing)]]
        for args in runs:
            proc = subprocess.run([cli, *args], capture_output=True, text=True)
            if proc.returncode not in (0, 3):
                print(f"exit {proc.returncode}: {' '.join(args)}\n{proc.stderr}")
                failures += 1
                continue
            text = listing.read_text() if args[0] == "preset" else proc.stdout
            errors = sorted(validator.iter_errors(json.loads(text)), key=str)
            for err in errors:
                print(f"{' '.join(args)}: {err.json_path}: {err.message}")
            failures += bool(errors)
            print(f"{'ok  ' if not errors else 'FAIL'} {' '.join(args)}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
