"""Command line interface.

    g2cert validate <catalog>
    g2cert lambda <algebra> [--witness]
    g2cert derivations <algebra> [--params k=v,...]
    g2cert su3 <algebra> [--gauge] [--samples N] [--seed S]
    g2cert run-all <catalog> --out report.json [--md report.md] [--threads N]

<catalog> is a built-in dataset name (table1, nonsolvable, indecomposable),
'all', or a path to a catalog JSON file.  <algebra> is an entry name or an
unambiguous substring of one.  Exit code 0 iff every attempted certificate
verifies.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import catalog as cat
from .certify import (
    Outcome,
    PipelineOptions,
    generic_su3_candidate,
    run_all,
    run_pipeline,
)
from .derivations import solve_derivations
from .errors import G2CertError
from .forms import generic_two_form
from .hitchin import k_psi
from .lie import LieAlgebra, ce_differential
from .poly import check_nonneg_witness


def _load(spec: str):
    return cat.load_any(spec)


def _find_entry(name: str):
    entries = []
    for ds in cat.BUILTIN_DATASETS:
        entries.extend(cat.load_builtin(ds))
    exact = [e for e in entries if e.name == name]
    if exact:
        return exact[0]
    matches = [e for e in entries if name in e.name]
    if len(matches) == 1:
        return matches[0]
    if not matches:
        raise SystemExit(f"no catalog entry matches {name!r}")
    raise SystemExit(f"ambiguous name {name!r}: " + ", ".join(e.name for e in matches))


def cmd_validate(args) -> int:
    entries = _load(args.catalog)
    for entry in entries:
        status = "stub (data not shipped)" if entry.stub else "ok"
        print(f"validated {entry.name}: {status}")
    print(f"{len(entries)} entries validated")
    return 0


def cmd_lambda(args) -> int:
    entry = _find_entry(args.algebra)
    if entry.dim != 6:
        raise SystemExit(f"{entry.name} has dimension {entry.dim}; lambda lives on dimension 6")
    algebra = entry.build_algebra()
    lam = k_psi(ce_differential(algebra, generic_two_form(6, "alpha"))).lam
    print(f"lambda(d alpha) on {entry.name}:")
    print(f"  {lam}")
    if lam.is_zero():
        print("  identically zero")
        return 0
    if args.witness:
        witness = entry.witness("lambda")
        if witness is None:
            print("  no nonnegativity witness shipped for this entry")
            return 1
        check_nonneg_witness(lam, witness)
        print("  nonnegativity witness verifies: lambda >= 0 for all real coefficients")
    return 0


def cmd_derivations(args) -> int:
    entry = _find_entry(args.algebra)
    algebra = entry.build_algebra()
    params = {}
    if args.params:
        for item in args.params.split(","):
            key, _, value = item.partition("=")
            name = key.strip()
            params[name if name.startswith("fam_") else f"fam_{name}"] = Fraction(value)
    fam_vars = algebra.family_parameters()
    missing = fam_vars - set(params)
    if missing:
        raise SystemExit(
            f"{entry.name} depends on family parameters {sorted(missing)}; fix them with --params"
        )
    if params:
        algebra = LieAlgebra(
            algebra.dim,
            [d.substitute(params) for d in algebra.differentials],
            name=algebra.name,
        )
    family = solve_derivations(algebra)
    print(f"Der({entry.name}) at {({k: str(v) for k, v in params.items()} or 'rational constants')}:")
    print(f"  dimension {len(family.params)}, parameters {', '.join(family.params)}")
    for row in family.matrix:
        print("  [ " + ", ".join(f"{e}" for e in row) + " ]")
    return 0


def cmd_su3(args) -> int:
    entry = _find_entry(args.algebra)
    if entry.dim != 6:
        raise SystemExit(f"{entry.name} has dimension {entry.dim}")
    options = PipelineOptions(
        trials_override=args.samples,
        seed_override=args.seed,
        skip_sampling=args.samples == 0,
    )
    result = run_pipeline(entry, options)
    print(f"{entry.name}: {result.outcome.value}")
    for cert in result.certificates:
        status = "verified" if cert.verified else "FAILED"
        print(f"  [{status}] {cert.kind.value} {cert.data.get('pair') or cert.data.get('indices') or ''}")
        if args.gauge and cert.kind.value == "gauge_null":
            print(f"    branch condition: {cert.data['branch_condition']}")
            for sv, num in cert.data["solved_gauge"].items():
                print(f"    {sv} = ({num}) / branch condition")
    for note in result.notes:
        print(f"  note: {note}")
    return 0 if result.ok() else 1


def cmd_run_all(args) -> int:
    entries = _load(args.catalog)
    options = PipelineOptions(trials_override=args.samples, seed_override=args.seed)
    report = run_all(entries, options, threads=args.threads)
    document = report.to_json()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            json.dump(document, handle, indent=2, sort_keys=True)
            handle.write("\n")
        print(f"report written to {args.out}")
    if args.md:
        with open(args.md, "w", encoding="utf-8") as handle:
            handle.write(report.to_markdown())
        print(f"markdown report written to {args.md}")
    for result in report.results:
        print(f"{result.name:34s} {result.outcome.value}")
    ok = report.verified_all()
    print(f"all attempted certificates verify: {ok}")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="g2cert",
        description="Exact-arithmetic obstruction certificates for invariant exact "
        "G2-structures on 7-dimensional Lie groups.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse and re-validate a catalog")
    p.add_argument("catalog")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("lambda", help="the quartic invariant of the generic exact 3-form")
    p.add_argument("algebra")
    p.add_argument("--witness", action="store_true", help="check the shipped nonnegativity witness")
    p.set_defaults(func=cmd_lambda)

    p = sub.add_parser("derivations", help="solve the derivation algebra at rational parameters")
    p.add_argument("algebra")
    p.add_argument("--params", default="", metavar="k=v,...")
    p.set_defaults(func=cmd_derivations)

    p = sub.add_parser("su3", help="run the SU(3) obstruction stage for one algebra")
    p.add_argument("algebra")
    p.add_argument("--gauge", action="store_true", help="print gauge certificate details")
    p.add_argument("--samples", type=int, default=None, metavar="N")
    p.add_argument("--seed", type=int, default=None, metavar="S")
    p.set_defaults(func=cmd_su3)

    p = sub.add_parser("run-all", help="run every pipeline and write the report")
    p.add_argument("catalog")
    p.add_argument("--out", default="", metavar="report.json")
    p.add_argument("--md", default="", metavar="report.md")
    p.add_argument("--threads", type=int, default=1, metavar="N")
    p.add_argument("--samples", type=int, default=None, metavar="N")
    p.add_argument("--seed", type=int, default=None, metavar="S")
    p.set_defaults(func=cmd_run_all)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except G2CertError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
