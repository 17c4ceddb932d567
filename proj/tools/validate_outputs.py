#!/usr/bin/env python3
"""Validate shipped specs and generated reports against the published schemas."""
import argparse
import csv
import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema

CSV_HEADERS = {
    "table_levels.csv": ["level", "dofs", "F", "grad_norm", "iterations", "seminorm", "level_change", "status"],
    "trace.csv": ["level", "iter", "F", "grad_norm", "step", "seminorm"],
    "table_liminf.csv": ["k", "F"],
    "table_weak.csv": ["k", "grad_p_norm", "dictionary_max", "lq_distance"],
    "table_truncation.csv": ["j", "measure", "measure_nonstrict", "moment", "bound", "holds"],
    "table_lemma.csv": ["j", "cells", "norm", "measure"],
}

RUNS = [
    ("check", "dirichlet_mass_cert.json"),
    ("check", "double_well_1d.json"),
    ("check", "minimal_surface_1d.json"),
    ("minimize", "dirichlet_1d.json"),
    ("minimize", "dirichlet_mass_cert.json"),
    ("minimize", "minimal_surface_1d.json"),
    ("minimize", "p_laplace_1d.json"),
    ("minimize", "double_well_1d.json"),
    ("minimize", "dirichlet_2d_product.json"),
    ("semicont", "semicont_dirichlet_sawtooth.json"),
    ("semicont", "semicont_double_well_sawtooth.json"),
    ("lemma-apim", "lemma_identity.json"),
    ("lemma-apim", "lemma_sign_odd.json"),
]


def check_csv(path, errors):
    want = CSV_HEADERS.get(path.name)
    if want is None:
        errors.append(f"{path}: undocumented output file")
        return
    with path.open(newline="") as f:
        rows = list(csv.reader(f))
    if not rows or rows[0] != want:
        errors.append(f"{path}: header {rows[0] if rows else None} != {want}")
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != len(want):
            errors.append(f"{path}:{i}: {len(row)} columns, expected {len(want)}")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--varmin", required=True)
    ap.add_argument("--root", required=True)
    args = ap.parse_args()
    root = pathlib.Path(args.root)
    problem = json.loads((root / "schemas" / "problem.schema.json").read_text())
    report = json.loads((root / "schemas" / "report.schema.json").read_text())
    pv = jsonschema.Draft202012Validator(problem)
    rv = jsonschema.Draft202012Validator(report)
    errors = []

    specs = sorted((root / "specs").glob("*.json"))
    for spec in specs:
        for e in pv.iter_errors(json.loads(spec.read_text())):
            errors.append(f"{spec.name}: {e.json_path}: {e.message}")

    with tempfile.TemporaryDirectory() as tmp:
        jobs = [(cmd, root / "specs" / spec, []) for cmd, spec in RUNS]
        jobs.append(("minimize", root / "specs" / "p_laplace_1d.json", ["-v"]))
        jobs.append(("minimize", pathlib.Path(tmp) / "missing.json", []))
        for n, (cmd, spec, extra) in enumerate(jobs):
            out = pathlib.Path(tmp) / f"run{n}"
            proc = subprocess.run([args.varmin, cmd, "--spec", str(spec), "--out", str(out), *extra],
                                  capture_output=True, text=True)
            doc = json.loads((out / "report.json").read_text())
            if doc.get("exit_code") != proc.returncode:
                errors.append(f"{cmd} {spec.name}: exit {proc.returncode} but report says {doc.get('exit_code')}")
            for e in rv.iter_errors(doc):
                errors.append(f"{cmd} {spec.name}: {e.json_path}: {e.message}")
            for path in sorted(out.glob("*.csv")):
                check_csv(path, errors)

    for e in errors:
        print(e)
    print(f"{len(specs)} specs, {len(jobs)} runs, {len(errors)} schema errors")
    return 1 if errors else 0


if __name__ == "__main__":
    sys.exit(main())
