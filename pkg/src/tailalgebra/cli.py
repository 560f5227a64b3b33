"""Command-line interface.

    tailalgebra analyze   MODEL.gga
    tailalgebra repr      MODEL.gga [--var NAME] [--epsilon E]
    tailalgebra posterior MODEL.gga --param NAME
    tailalgebra verify    MODEL.gga --seed S [--samples N] [--report analyze.json]
    tailalgebra sample    MODEL.gga --seed S [--samples N] [--var NAME] [--representative]

Exit status: 0 clean, 2 when warnings were raised, 1 on errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import List, Optional

from . import tails as T
from .catalog import sample_representative, write_csv
from .dsl import analyze, compile_model
from .dsl.analysis import Entry, TailReport
from .errors import DSLError, TailAlgebraError
from .posterior import PosteriorQuery, posterior
from .representative import RepresentativeConfig, representative, spec_to_json
from .streams import Stream
from .verify import density_table, forward_sample, mc_verify

__all__ = ["main", "build_parser"]

EXIT_OK, EXIT_ERROR, EXIT_WARN = 0, 1, 2


def _clean(obj):
    """JSON-safe copy: non-finite floats become strings (or null for NaN)."""
    if isinstance(obj, float):
        if math.isnan(obj):
            return None
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return obj
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2, allow_nan=False) + "\n"


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tailalgebra",
                                description="Static tail analysis of probabilistic programs.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("input", help="model source file ('-' for standard input)")
        sp.add_argument("--out", help="write the result here instead of standard output")
        sp.add_argument("--format", choices=("json", "csv"), default=None)
        sp.add_argument("--error-json", action="store_true",
                        help="also print errors as JSON on standard output")
        return sp

    common(sub.add_parser("analyze", help="tail class of every node"))
    sp = common(sub.add_parser("repr", help="sampleable representative per queried node"))
    sp.add_argument("--var", action="append", help="variable name (repeatable)")
    sp.add_argument("--epsilon", type=float, default=0.1,
                    help="shape threshold below which tails are projected to power laws")
    sp = common(sub.add_parser("posterior", help="tail class of a parameter's posterior"))
    sp.add_argument("--param", required=True)
    sp.add_argument("--latent", action="append",
                    help="named draw to integrate over instead of holding fixed")
    sp = common(sub.add_parser("verify", help="Monte-Carlo check of predicted classes"))
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--samples", type=int, default=1_000_000)
    sp.add_argument("--tail-fraction", type=float, default=0.01)
    sp.add_argument("--var", action="append")
    sp.add_argument("--report", help="reuse the classes of a saved analyze report")
    sp = common(sub.add_parser("sample", help="draws of a variable as CSV"))
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--samples", type=int, default=10_000)
    sp.add_argument("--var")
    sp.add_argument("--representative", action="store_true",
                    help="sample the representative of the variable's class instead")
    sp.add_argument("--epsilon", type=float, default=0.1)
    return p


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _targets(g, names: Optional[List[str]]) -> List[int]:
    if names:
        return [g.node_of(n) for n in names]
    ids = list(g.queries or g.observed)
    return ids or sorted(set(g.names.values()))


def _report_from_json(g, d: dict) -> TailReport:
    entries = {}
    for e in d["nodes"]:
        cls = None if e["class"] == "unknown" else T.from_json(e["class"])
        entries[e["id"]] = Entry(e["id"], e["expr"], e.get("name"), cls,
                                 tuple(e.get("warnings", ())), e.get("error"))
    return TailReport(d.get("model", g.model), entries)


def _cmd_analyze(args, g):
    rep = analyze(g)
    for w in rep.dependence:
        print(f"{args.input}: warning: {w} (treated as independent)", file=sys.stderr)
    for e in rep.entries.values():
        if e.error:
            print(f"{args.input}: node {e.id} ({e.expr}): {e.error}", file=sys.stderr)
        for w in e.warnings:
            print(f"{args.input}: node {e.id} ({e.expr}): warning: {w}", file=sys.stderr)
    return dumps(rep.to_json()), rep.status


def _cmd_repr(args, g):
    rep = analyze(g)
    cfg = RepresentativeConfig(epsilon=args.epsilon)
    out, status = [], rep.status
    for i in _targets(g, args.var):
        flags: set = set()
        cls = rep.cls(i)
        if cls is None:
            raise TailAlgebraError(f"{g.display_name(i)} has no tail class: {rep[i].error}")
        spec = spec_to_json(representative(cls, cfg, flags))
        for f in sorted(str(f) for f in flags):
            print(f"{args.input}: {g.display_name(i)}: warning: {f}", file=sys.stderr)
            status = max(status, EXIT_WARN) if status != EXIT_ERROR else status
        out.append((g.display_name(i), cls, spec, flags))
    if args.var and len(out) == 1:
        return dumps(out[0][2]), status
    return dumps({"model": g.model, "nodes": [
        {"name": n, "class": T.to_json(c), "representative": s,
         "warnings": sorted(str(f) for f in fl)} for n, c, s, fl in out]}), status


def _cmd_posterior(args, g):
    res = posterior(PosteriorQuery(g, args.param,
                                   latent=frozenset(args.latent) if args.latent else None))
    for f in sorted(res.flags):
        print(f"{args.input}: {args.param}: warning: {f}", file=sys.stderr)
    return dumps(res.to_json(g)), EXIT_WARN if res.flags else EXIT_OK


def _cmd_verify(args, g):
    if args.report:
        with open(args.report, encoding="utf-8") as fh:
            rep = _report_from_json(g, json.load(fh))
    else:
        rep = analyze(g)
    ids = _targets(g, args.var)
    vr, xs = mc_verify(g, rep, args.samples, seed=args.seed, tail_fraction=args.tail_fraction,
                       nodes=ids, return_samples=True)
    status = EXIT_OK if all(e.verdict == "Consistent" for e in vr.entries) else EXIT_WARN
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["node", "x", "log_density"])
        for i, x in xs.items():
            try:
                rows = density_table(x)
            except TailAlgebraError:
                continue
            for xv, ld in rows:
                w.writerow([g.display_name(i), repr(xv), repr(ld)])
        return buf.getvalue(), status
    return dumps(vr.to_json()), status


def _cmd_sample(args, g):
    i = _targets(g, [args.var] if args.var else None)[0]
    stream = Stream(args.seed)
    if args.representative:
        flags: set = set()
        cls = analyze(g).cls(i)
        if cls is None:
            raise TailAlgebraError(f"{g.display_name(i)} has no tail class")
        spec = representative(cls, RepresentativeConfig(epsilon=args.epsilon), flags)
        x = sample_representative(spec, stream, args.samples)
        label = json.dumps(spec_to_json(spec))
    else:
        x = forward_sample(g, i, stream, args.samples)
        label = f"{g.model}:{g.display_name(i)}"
    buf = io.StringIO()
    write_csv(buf, x, seed=args.seed, spec=label, column=g.display_name(i))
    return buf.getvalue(), EXIT_OK


_COMMANDS = {"analyze": _cmd_analyze, "repr": _cmd_repr, "posterior": _cmd_posterior,
             "verify": _cmd_verify, "sample": _cmd_sample}


def _fail(args, ex: Exception) -> int:
    where = args.input
    line, col = getattr(ex, "line", None), getattr(ex, "col", None)
    if isinstance(ex, DSLError) and line is not None:
        print(f"{where}:{ex}", file=sys.stderr)
    elif line is not None:
        print(f"{where}:{line}:{col}: {type(ex).__name__}: {ex}", file=sys.stderr)
    else:
        print(f"{where}: {type(ex).__name__}: {ex}", file=sys.stderr)
    if args.error_json:
        d = ex.to_json() if isinstance(ex, DSLError) else {
            "error": type(ex).__name__, "message": str(ex), "line": line, "col": col}
        d["file"] = where
        sys.stdout.write(dumps(d))
    return EXIT_ERROR


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "sample" and args.format == "json":
        print("sample writes CSV only", file=sys.stderr)
        return EXIT_ERROR
    try:
        g = compile_model(_read(args.input))
        text, status = _COMMANDS[args.command](args, g)
    except (TailAlgebraError, OSError, ValueError, KeyError) as ex:
        return _fail(args, ex)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
