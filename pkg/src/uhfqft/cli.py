"""Command-line harness: ``uhfqft <subcommand> [flags]``.

Exit status is 0 when every check passes, 1 when any check fails and 2 on
usage or configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import fields

from .checks import SUBCOMMANDS, Settings, run_checks
from .errors import UHFError

COMMANDS = tuple(SUBCOMMANDS) + ("report-all",)


class ConfigError(ValueError):
    pass


def _float_list(text: str) -> list:
    return [float(v) for v in text.replace(",", " ").split()]


def _optional_float(text: str):
    return None if text.strip().lower() in ("", "none") else float(text)


# dest -> converter, shared by flags and config keys
CONVERTERS = {
    "mass": float,
    "dirac_mass": float,
    "coupling_l": float,
    "trunc": int,
    "quad_nodes": int,
    "quad_cutoff": _optional_float,
    "epsilon": float,
    "tol": _optional_float,
    "grid": int,
    "nmax": int,
    "a": _float_list,
    "out": str,
    "seed": int,
}


def _shared_options() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    p.add_argument("--mass", type=float, help="scalar mass m (default 1)")
    p.add_argument("--dirac-mass", type=float, help="Dirac mass M (default 1)")
    p.add_argument("--coupling-l", type=float, help="coupling l (default 0.5)")
    p.add_argument("--trunc", type=int, help="series truncation (check-specific default)")
    p.add_argument("--quad-nodes", type=int, help="Gauss-Legendre nodes per panel (default 16)")
    p.add_argument("--quad-cutoff", type=float, help="momentum cutoff (default: from tail bound)")
    p.add_argument("--epsilon", type=float, help="imaginary-time damping (default 0.5)")
    p.add_argument("--tol", type=float, help="override the check tolerance")
    p.add_argument("--grid", type=int, help="number of sample points (check-specific default)")
    p.add_argument("--nmax", type=int, help="partial-sum order for localize (default 60)")
    p.add_argument("--a", type=float, action="append", help="shift for localize; repeatable")
    p.add_argument("--out", choices=("json", "csv"), help="output format (default json)")
    p.add_argument("--seed", type=int, help="sampling seed (default 0)")
    p.add_argument("--config", metavar="PATH", help="file of 'key = value' lines; flags win")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="uhfqft", description="Numerical checks for the nonlocal QFT model.")
    sub = parser.add_subparsers(dest="command", metavar="SUBCOMMAND", required=True)
    shared = _shared_options()
    for name in COMMANDS:
        sub.add_parser(name, parents=[shared], help=f"run the {name} checks")
    return parser


def read_config(path: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment, keys may use ``-`` or ``_``."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    out = {}
    for num, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{num}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        dest = key.lstrip("-").replace("-", "_")
        if dest not in CONVERTERS:
            raise ConfigError(f"{path}:{num}: unknown key {key!r}")
        try:
            out[dest] = CONVERTERS[dest](value)
        except ValueError as exc:
            raise ConfigError(f"{path}:{num}: bad value for {key!r}: {exc}") from exc
    if out.get("out", "json") not in ("json", "csv"):
        raise ConfigError(f"{path}: out must be json or csv")
    return out


def resolve(ns: argparse.Namespace) -> tuple[Settings, str]:
    given = vars(ns).copy()
    merged = read_config(given.pop("config")) if "config" in given else {}
    given.pop("command", None)
    merged.update(given)
    out = merged.pop("out", "json")
    names = {f.name for f in fields(Settings)}
    return Settings(**{k: v for k, v in merged.items() if k in names}), out


def render(reports, fmt: str) -> str:
    rows = [r.to_dict() for r in reports]
    if fmt == "json":
        return json.dumps(rows, indent=2, ensure_ascii=False) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["check", "params", "observed", "expected", "tolerance", "passed", "runtime_ms"])
    for row in rows:
        w.writerow([row["check"], json.dumps(row["params"], sort_keys=True),
                    json.dumps(row["observed"]), json.dumps(row["expected"]),
                    "" if row["tolerance"] is None else row["tolerance"],
                    int(row["passed"]), row["runtime_ms"]])
    return buf.getvalue()


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        settings, fmt = resolve(ns)
    except (ConfigError, TypeError) as exc:
        parser.print_usage(sys.stderr)
        print(f"uhfqft: error: {exc}", file=sys.stderr)
        return 2
    try:
        reports = run_checks(ns.command, settings)
    except (UHFError, ValueError) as exc:
        parser.print_usage(sys.stderr)
        print(f"uhfqft: error: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write(render(reports, fmt))
    return 0 if all(r.passed for r in reports) else 1


if __name__ == "__main__":
    sys.exit(main())
