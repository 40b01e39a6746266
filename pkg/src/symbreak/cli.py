"""Command line front end: ``symbreak <subcommand> --config problem.json``."""
from __future__ import annotations

import argparse
import os
import sys

from . import __version__
from .config import ConfigErrors, load_config
from .errors import SymbreakError
from .report import dumps, run, validate_report

EXIT_CONFIG = 2
EXIT_FAILURE = 3

SECTIONS = {
    "spectrum": (),
    "decompose": ("spectrum",),
    "check": ("records", "verdicts"),
    "verify": ("records", "verification"),
    "report": ("spectrum", "records", "verdicts", "verification"),
}
HELP = {
    "spectrum": "list Neumann eigenvalues up to the cutoff",
    "decompose": "eigenvalues with fixed-space dimensions and broken isotypic blocks",
    "check": "critical point records and criterion verdicts",
    "verify": "Galerkin crossing detection and branch continuation",
    "report": "full pipeline",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="symbreak", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SECTIONS:
        p = sub.add_parser(name, help=HELP[name])
        p.add_argument("--config", required=True, help="problem configuration (JSON)")
        p.add_argument("--out", help="directory for <command>.json and branch CSV files")
        p.add_argument("--mu-max", type=float, help="override cutoffs.mu_max")
        p.add_argument("--quiet", action="store_true", help="do not print the JSON report")
    return parser


def _spectrum_only(report: dict) -> dict:
    # 'spectrum' subcommand: plain eigenvalue table without isotypic columns
    keep = ("mu", "angular_index", "radial_index", "eigenspace_dim")
    report["spectrum"] = [{k: row[k] for k in keep} for row in report["spectrum"]]
    return report


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
    except ConfigErrors as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"cannot read configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.command == "verify" and not config["verify"]["enabled"]:
        config.raw["verify"]["enabled"] = True
        if config["F"]["mode"] != "polynomial" or config["domain"]["kind"] != "disc":
            print("verify: requires F/mode = polynomial and domain/kind = disc", file=sys.stderr)
            return EXIT_CONFIG
    sections = SECTIONS[args.command] or ("spectrum",)
    try:
        report, code = run(config, out_dir=args.out, mu_max=args.mu_max, sections=sections)
    except SymbreakError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    if args.command == "spectrum":
        report = _spectrum_only(report)
    validate_report(report)
    text = dumps(report)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, f"{args.command}.json"), "w") as fh:
            fh.write(text)
    if not args.quiet:
        sys.stdout.write(text)
    if args.command in ("check", "report"):
        return code
    return 0


if __name__ == "__main__":
    sys.exit(main())
