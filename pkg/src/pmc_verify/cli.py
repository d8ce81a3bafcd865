"""Command-line front end: ``verify`` (identity suites), ``gate`` (theorems), ``catalog``.

Exit codes: 0 all applicable checks pass, 1 usage error, 2 verification
failure, 3 numerical error (degenerate metric, off-manifold chart, ...).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field

from . import __version__
from .catalog import FAMILIES, CatalogSpec, family_info, list_catalog, make_surface
from .errors import BadParameters, NotApplicable, PmcVerifyError, UsageError
from .identities import SELECTORS, IdentityReport, SuiteResult, run_suite, thread_count
from .theorem_gates import THEOREM_NAMES, GateReport, check_gate

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAILURE = 2
EXIT_NUMERIC = 3

PARAM_FLAGS = ("r", "rho", "eps", "h", "k")
FORMATS = ("json", "csv", "text")
NUMERIC_PREFIX = "numerical error: "


@dataclass
class RunConfig:
    command: str
    surface: str | None = None
    c: float | None = None
    params: dict[str, float] = field(default_factory=dict)
    grid: int = 8
    degree: int = 4
    tol: float = 1e-7
    identities: list[str] = field(default_factory=list)
    theorems: list[str] = field(default_factory=list)
    format: str = "json"
    output: str | None = None

    def public(self) -> dict:
        """Fields that determine the result (output path excluded)."""
        d = asdict(self)
        d.pop("output")
        return d

    def fingerprint(self) -> str:
        return hashlib.sha256(dumps_json(self.public()).encode()).hexdigest()


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _finite_float(flag):
    def conv(text):
        try:
            val = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{flag} expects a number, got {text!r}") from None
        if not math.isfinite(val):
            raise argparse.ArgumentTypeError(f"{flag} must be finite")
        return val

    return conv


def _build_parser() -> _Parser:
    parser = _Parser(prog="pmc-verify", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"pmc-verify {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, surface=True):
        if surface:
            p.add_argument("--surface", required=True, help=f"catalog family: {', '.join(FAMILIES)}")
            p.add_argument("--c", type=_finite_float("--c"), default=None, help="space-form curvature")
            for name in PARAM_FLAGS:
                p.add_argument(f"--{name}", type=_finite_float(f"--{name}"), default=None)
            p.add_argument("--grid", type=int, default=8, help="n for an n x n sample grid")
            p.add_argument("--degree", type=int, default=4, help="jet degree")
            p.add_argument("--tol", type=_finite_float("--tol"), default=1e-7)
        p.add_argument("--format", choices=FORMATS, default="json")
        p.add_argument("--output", default=None, help="file path (default: stdout)")

    verify = sub.add_parser("verify", help="evaluate identities over a grid")
    common(verify)
    verify.add_argument("--identities", default="all", help=f"'all' or comma list of: {', '.join(SELECTORS)}")
    gate = sub.add_parser("gate", help="check classification theorems")
    common(gate)
    gate.add_argument("--theorem", default="all", help=f"'all' or comma list of: {', '.join(THEOREM_NAMES)}")
    catalog = sub.add_parser("catalog", help="list catalog families")
    common(catalog, surface=False)
    return parser


def _split(text: str, valid, flag: str) -> list[str]:
    if text == "all":
        return list(valid)
    names = [s.strip() for s in text.split(",") if s.strip()]
    if not names:
        raise UsageError(f"{flag} is empty")
    for name in names:
        if name not in valid:
            raise UsageError(f"{flag}: unknown name {name!r}; valid: {', '.join(valid)}")
    return [v for v in valid if v in names]


def parse_args(argv) -> RunConfig:
    """Parse and validate; raises UsageError naming the offending flag."""
    ns = _build_parser().parse_args(list(argv))
    cfg = RunConfig(command=ns.command, format=ns.format, output=ns.output)
    if ns.command == "catalog":
        return cfg

    if ns.surface not in FAMILIES:
        raise UsageError(f"--surface: unknown family {ns.surface!r}; valid families: {', '.join(FAMILIES)}")
    info = family_info(ns.surface)
    cfg.surface = ns.surface
    cfg.c = ns.c if ns.c is not None else info.default_c
    for name in PARAM_FLAGS:
        val = getattr(ns, name)
        if val is None:
            continue
        if name not in info.params:
            allowed = ", ".join(f"--{p}" for p in info.params) or "none"
            raise UsageError(f"--{name} does not apply to {ns.surface} (parameters: {allowed})")
        cfg.params[name] = val
    if ns.grid < 1:
        raise UsageError(f"--grid must be >= 1, got {ns.grid}")
    if ns.degree < 2:
        raise UsageError(f"--degree must be >= 2, got {ns.degree}")
    if not ns.tol > 0:
        raise UsageError(f"--tol must be > 0, got {ns.tol}")
    cfg.grid, cfg.degree, cfg.tol = ns.grid, ns.degree, ns.tol
    if ns.command == "verify":
        cfg.identities = _split(ns.identities, SELECTORS, "--identities")
    else:
        cfg.theorems = _split(ns.theorem, THEOREM_NAMES, "--theorem")

    try:
        im, _ = make_surface(CatalogSpec(cfg.surface, cfg.c, dict(cfg.params)))
    except BadParameters as exc:
        # catalog messages lead with the parameter name ("r out of domain: ...")
        first = str(exc).split()[0]
        flag = f"--{first}" if first in PARAM_FLAGS else ("--h/--k" if cfg.surface == "rotational_cmc" else "--c")
        raise UsageError(f"{flag}: {exc}") from None
    cfg.params = {k: float(im.params[k]) for k in info.params if k in im.params}
    return cfg


# -- serialization ---------------------------------------------------------------


def _fmt_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        return '"' + repr(x) + '"'
    return "%.17g" % (x + 0.0)  # prints -0.0 as 0


def dumps_json(obj, indent: int = 2, _level: int = 0) -> str:
    """Deterministic JSON with floats printed to 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _fmt_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=True)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{dumps_json(str(k))}: {dumps_json(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + dumps_json(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if hasattr(obj, "item"):  # numpy scalar
        return dumps_json(obj.item(), indent, _level)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def identity_record(rep: IdentityReport) -> dict:
    return {
        "label": rep.label,
        "kind": rep.kind.value,
        "aux": rep.aux,
        "point": [rep.point[0], rep.point[1]],
        "status": rep.status,
        "lhs": rep.lhs,
        "rhs": rep.rhs,
        "residual": rep.residual,
        "terms": dict(rep.terms),
        "extras": dict(rep.extras),
    }


def gate_record(rep: GateReport) -> dict:
    return {
        "theorem": rep.theorem.value,
        "status": rep.status,
        "reason": rep.reason,
        "hypothesis_satisfied": rep.hypothesis_satisfied,
        "predicted_case": rep.predicted_case,
        "hypothesis_margins": dict(rep.hypothesis_margins),
        "readings": dict(rep.readings),
        "observed": dict(rep.observed),
        "assumed": dict(rep.assumed),
        "grid": dict(rep.grid),
    }


def _csv_text(records: list[dict]) -> str:
    scalar_keys: list[str] = []
    nested: dict[str, list[str]] = {}
    for rec in records:
        for k, v in rec.items():
            if isinstance(v, dict):
                cols = nested.setdefault(k, [])
                cols.extend(name for name in v if name not in cols)
            elif k == "point":
                for p in ("u", "v"):
                    if p not in scalar_keys:
                        scalar_keys.append(p)
            elif k not in scalar_keys:
                scalar_keys.append(k)
    header = scalar_keys + [f"{k}:{name}" for k, cols in nested.items() for name in cols]

    def cell(v):
        if v is None:
            return ""
        if isinstance(v, bool):
            return "true" if v else "false"
        if isinstance(v, float):
            return "%.17g" % v
        if isinstance(v, (list, tuple)):
            return ";".join(str(cell(x)) for x in v)
        return str(v)

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for rec in records:
        flat = dict(rec)
        if "point" in flat:
            flat["u"], flat["v"] = flat.pop("point")
        row = [cell(flat.get(k)) for k in scalar_keys]
        for k, cols in nested.items():
            row += [cell(rec.get(k, {}).get(name)) for name in cols]
        writer.writerow(row)
    return buf.getvalue()


def _text_verify(cfg: RunConfig, summary: dict) -> str:
    lines = [f"pmc-verify {__version__}: verify {cfg.surface} c={cfg.c:g} {cfg.params} grid={cfg.grid}x{cfg.grid} tol={cfg.tol:g}"]
    for row in summary["identities"]:
        mr = row["max_residual"]
        mr_s = "-" if mr is None else f"{mr:.3e}"
        extra = f" ({', '.join(row['reasons'])})" if row["reasons"] else ""
        lines.append(
            f"  {'PASS' if row['pass'] else 'FAIL'}  {row['label']:<17} max residual {mr_s:>10}  "
            f"evaluated {row['evaluated']}, not applicable {row['not_applicable']}, errors {row['errors']}{extra}"
        )
    lines.append(f"result: {'pass' if summary['pass'] else 'fail'} (exit {summary['exit_code']})")
    return "\n".join(lines) + "\n"


def _text_gate(cfg: RunConfig, records: list[dict], summary: dict) -> str:
    lines = [f"pmc-verify {__version__}: gate {cfg.surface} c={cfg.c:g} {cfg.params} grid={cfg.grid}x{cfg.grid}"]
    for rec in records:
        reason = f" ({rec['reason']})" if rec.get("reason") and rec["status"] == "fail" else ""
        lines.append(f"  {rec['theorem']}: {rec['status']}{reason}")
        if "predicted_case" in rec:
            lines.append(f"    predicted: {rec['predicted_case']}")
            for k, v in rec["hypothesis_margins"].items():
                lines.append(f"    margin {k} = {v:.6g}")
    lines.append(f"result: {'pass' if summary['pass'] else 'fail'} (exit {summary['exit_code']})")
    return "\n".join(lines) + "\n"


def _render(cfg: RunConfig, records: list[dict], summary: dict, text: str) -> str:
    if cfg.format == "json":
        config = cfg.public()
        config["tool"] = {"name": "pmc-verify", "version": __version__}
        config["fingerprint"] = cfg.fingerprint()
        return dumps_json({"config": config, "summary": summary, "reports": records}) + "\n"
    if cfg.format == "csv":
        return _csv_text(records)
    return text


# -- execution -------------------------------------------------------------------


def _verify(cfg: RunConfig) -> tuple[int, str]:
    im, _ = make_surface(CatalogSpec(cfg.surface, cfg.c, dict(cfg.params)))
    result: SuiteResult = run_suite(im, cfg.grid, cfg.identities, cfg.tol, cfg.degree)
    records = [identity_record(r) for r in result.reports]
    failures = sum(1 for row in result.summary if not row["pass"] and row["errors"] == 0)
    if result.errors:
        code = EXIT_NUMERIC
    elif failures:
        code = EXIT_FAILURE
    else:
        code = EXIT_OK
    evaluated = [row["max_residual"] for row in result.summary if row["max_residual"] is not None]
    summary = {
        "pass": code == EXIT_OK,
        "exit_code": code,
        "max_residual": max(evaluated) if evaluated else None,
        "identities": result.summary,
    }
    return code, _render(cfg, records, summary, _text_verify(cfg, summary))


def _gate(cfg: RunConfig) -> tuple[int, str]:
    im, _ = make_surface(CatalogSpec(cfg.surface, cfg.c, dict(cfg.params)))
    records, code = [], EXIT_OK
    for name in cfg.theorems:
        theorem = THEOREM_NAMES[name]
        try:
            rep = check_gate(theorem, im, cfg.grid, cfg.tol, cfg.degree)
        except NotApplicable as exc:
            # outside the scope is not a failure, except for the pmc hypothesis itself
            if exc.reason == "pmc residual exceeded":
                code = max(code, EXIT_FAILURE)
                records.append({"theorem": theorem.value, "status": "fail", "reason": exc.reason})
            else:
                records.append({"theorem": theorem.value, "status": f"not_applicable: {exc.reason}", "reason": exc.reason})
            continue
        if not rep.passed:
            code = max(code, EXIT_FAILURE)
        records.append(gate_record(rep))
    summary = {"pass": code == EXIT_OK, "exit_code": code, "theorems": [r["theorem"] for r in records]}
    return code, _render(cfg, records, summary, _text_gate(cfg, records, summary))


def _catalog(cfg: RunConfig) -> tuple[int, str]:
    records = list_catalog()
    summary = {"families": len(records)}
    text = "\n".join(
        f"{r['family']:<24} c {r['c_sign']:<8} params {r['params']} witnesses: {', '.join(r['witnesses'])}" for r in records
    ) + "\n"
    return EXIT_OK, _render(cfg, records, summary, text)


def execute(cfg: RunConfig) -> tuple[int, str]:
    """Run a validated config; returns (exit code, serialized report)."""
    try:
        if cfg.command == "verify":
            return _verify(cfg)
        if cfg.command == "gate":
            return _gate(cfg)
        return _catalog(cfg)
    except (PmcVerifyError, ArithmeticError) as exc:
        return EXIT_NUMERIC, f"{NUMERIC_PREFIX}{exc}\n"


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        thread_count()
        cfg = parse_args(argv)
    except (UsageError, ValueError) as exc:
        print(f"pmc-verify: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    code, text = execute(cfg)
    if text.startswith(NUMERIC_PREFIX):
        print(f"pmc-verify: {text}", end="", file=sys.stderr)
        return code
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code
