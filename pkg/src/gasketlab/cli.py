"""Command line front end.

Subcommands: validate, iterate, certify, enumerate-cores, apollonian,
compare.  Exit status is 0 exactly when every requested check passes;
failures print a JSON error object with a stable machine-readable code.
All outputs are deterministic; the timestamp field can be suppressed with
--deterministic for byte-identical reruns.

The engine is single threaded and fully deterministic; --threads and the
GASKET_LAB_THREADS variable are validated and accepted for compatibility
but do not change results.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

from .anchored import build_certificate
from .branched_cover import pullback, start_tower, validate_core
from .errors import GasketLabError, SchemaError
from .packing import (contact_graph_of_packing, generate_apollonian,
                      packing_to_svg, standard_root)
from .per2 import (bundled_cores, core_to_dict, corespec_from_dict,
                   enumerate_small_cores, make_per2_core)
from .plane_graph import is_bipartite, to_dot


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    argv = _join_negative_root(list(argv))
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        _resolve_threads(args)
        return args.handler(args)
    except SchemaError as exc:
        _emit_error(exc.code, exc.message)
        return 2
    except GasketLabError as exc:
        _emit_error(exc.code, exc.message)
        return 1
    except FileNotFoundError as exc:
        _emit_error("FileNotFound", str(exc))
        return 2


def _join_negative_root(argv: list[str]) -> list[str]:
    """Let ``--root -1,2,2,3`` parse even though the value starts with a dash."""
    out = []
    i = 0
    while i < len(argv):
        if (argv[i] == "--root" and i + 1 < len(argv)
                and argv[i + 1].startswith("-")
                and set(argv[i + 1]) <= set("-+.,0123456789")):
            out.append(f"--root={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gasketlab",
        description="Fatou graphs of gasket Julia sets at finite depth, "
                    "and Apollonian packings with contact-graph certificates.")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker cap (accepted for compatibility; the "
                             "engine is serial and deterministic)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a core against all core rules")
    p.add_argument("core", help="core JSON file or bundled core name")
    _common_output(p)
    p.set_defaults(handler=_cmd_validate)

    p = sub.add_parser("iterate", help="build the preimage tower of a core")
    p.add_argument("core")
    p.add_argument("--depth", type=int, default=3)
    _common_output(p, formats=("json", "dot"))
    p.set_defaults(handler=_cmd_iterate)

    p = sub.add_parser("certify",
                       help="full finite-depth certificate for a core")
    p.add_argument("core")
    p.add_argument("--depth", type=int, default=3)
    _common_output(p)
    p.set_defaults(handler=_cmd_certify)

    p = sub.add_parser("enumerate-cores",
                       help="exhaustively enumerate valid small cores")
    p.add_argument("--max-vertices", type=int, required=True)
    _common_output(p)
    p.set_defaults(handler=_cmd_enumerate)

    p = sub.add_parser("apollonian",
                       help="generate a packing and its contact certificate")
    p.add_argument("--root", default="-1,2,2,3",
                   help="comma-separated root curvatures")
    p.add_argument("--bound", type=float, default=100.0)
    p.add_argument("--tolerance", type=float, default=1e-9,
                   help="residual tolerance for the audits")
    _common_output(p, formats=("json", "svg", "dot"))
    p.set_defaults(handler=_cmd_apollonian)

    p = sub.add_parser("compare",
                       help="non-equivalence verdict from two certificates")
    p.add_argument("core_certificate")
    p.add_argument("packing_certificate")
    _common_output(p)
    p.set_defaults(handler=_cmd_compare)
    return parser


def _common_output(p: argparse.ArgumentParser,
                   formats: tuple[str, ...] = ("json",)) -> None:
    p.add_argument("--format", choices=formats, default="json")
    p.add_argument("--output", default="-", help="output path, - for stdout")
    p.add_argument("--deterministic", action="store_true",
                   help="suppress the timestamp field")


def _resolve_threads(args) -> None:
    raw = args.threads if args.threads is not None \
        else os.environ.get("GASKET_LAB_THREADS")
    if raw is None:
        return
    try:
        n = int(raw)
    except ValueError as exc:
        raise SchemaError(f"thread count {raw!r} is not an integer") from exc
    if n < 1:
        raise SchemaError(f"thread count must be positive, got {n}")


def _emit_error(code: str, message: str) -> None:
    json.dump({"error": code, "message": message}, sys.stderr)
    sys.stderr.write("\n")


def _write(args, text: str) -> None:
    if args.output == "-":
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        Path(args.output).write_text(
            text if text.endswith("\n") else text + "\n", encoding="utf-8")


def _emit_json(args, payload: dict) -> None:
    if not args.deterministic:
        payload = dict(payload)
        payload["generated_at"] = datetime.now(timezone.utc).isoformat()
    _write(args, json.dumps(payload, indent=2, sort_keys=True))


def _load_core_arg(name: str):
    """A path to a core JSON file, or the name of a bundled core."""
    if not os.path.exists(name):
        bundled = bundled_cores()
        if name in bundled:
            return bundled[name].spec, (bundled[name].a0, bundled[name].c)
        raise FileNotFoundError(name)
    with open(name, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"not valid JSON: {exc}") from exc
    return corespec_from_dict(data)


# ---------------------------------------------------------------------------
# handlers

def _cmd_validate(args) -> int:
    spec, _ = _load_core_arg(args.core)
    report = validate_core(spec)
    _emit_json(args, report.to_dict())
    return 0 if report.ok else 1


def _cmd_iterate(args) -> int:
    spec, crit = _load_core_arg(args.core)
    if not 1 <= args.depth <= 12:
        raise SchemaError(f"depth must be between 1 and 12, got {args.depth}")
    report = validate_core(spec)
    if not report.ok:
        _emit_json(args, report.to_dict())
        return 1
    t = start_tower(spec)
    for _ in range(args.depth - 1):
        t = pullback(t)
    if args.format == "dot":
        blocks = []
        for k, g in enumerate(t.levels):
            coloring = is_bipartite(g).coloring
            block = to_dot(g, coloring, highlight_edge=spec.fixed_edge)
            blocks.append(block.replace("graph plane_graph",
                                        f"graph level_{k}", 1))
        _write(args, "\n".join(blocks))
        return 0
    payload = {
        "core": spec.name,
        "depth": t.depth,
        "levels": [{
            "level": k,
            "vertices": len(g.vertices),
            "edges": len(g.edges),
            "faces": len(g.faces),
            "rotation": g.to_rotation_dict(),
        } for k, g in enumerate(t.levels)],
        "vertex_map": {v: t.vertex_map[v]
                       for g in t.levels[1:] for v in g.vertices},
    }
    _emit_json(args, payload)
    return 0


def _cmd_certify(args) -> int:
    spec, crit = _load_core_arg(args.core)
    if not 1 <= args.depth <= 12:
        raise SchemaError(f"depth must be between 1 and 12, got {args.depth}")
    report = validate_core(spec)
    if not report.ok:
        _emit_json(args, {"validation": report.to_dict()})
        return 1
    core = make_per2_core(spec, crit[0], crit[1])
    depths = [d for d in (3, 4, 5) if d <= args.depth] or [args.depth]
    cert = build_certificate(core, args.depth, symmetry_depths=depths)
    cert["validation"] = report.to_dict()
    _emit_json(args, cert)
    ok = cert["bipartite"] and (cert["sibling_report"] is None
                                or cert["sibling_report"]["passed"])
    return 0 if ok else 1


def _cmd_enumerate(args) -> int:
    cores = enumerate_small_cores(args.max_vertices)
    _emit_json(args, {
        "max_vertices_g1": args.max_vertices,
        "count": len(cores),
        "cores": [core_to_dict(c) for c in cores],
    })
    return 0


def _cmd_apollonian(args) -> int:
    try:
        curvatures = [float(x) for x in args.root.split(",")]
    except ValueError as exc:
        raise SchemaError(f"bad --root value {args.root!r}") from exc
    packing = generate_apollonian(standard_root(curvatures), args.bound)
    if args.format == "svg":
        _write(args, packing_to_svg(packing, with_graph=True))
        return 0
    cert = contact_graph_of_packing(packing)
    if args.format == "dot":
        coloring = is_bipartite(cert.graph).coloring
        _write(args, to_dot(cert.graph, coloring))
        return 0
    tol = args.tolerance
    audits = {
        "descartes_residual": packing.max_descartes_residual(),
        "tangency_residual": packing.max_tangency_residual(),
        "curvatures_integral": packing.curvatures_integral(),
        "tolerance": tol,
        "passed": (packing.max_descartes_residual() < tol
                   and packing.max_tangency_residual() < tol
                   and not cert.bipartite),
    }
    _emit_json(args, {
        "packing": packing.to_dict(),
        "contact_graph": cert.to_dict(),
        "audits": audits,
    })
    return 0 if audits["passed"] else 1


def _cmd_compare(args) -> int:
    with open(args.core_certificate, "r", encoding="utf-8") as fh:
        core_cert = json.load(fh)
    with open(args.packing_certificate, "r", encoding="utf-8") as fh:
        pack_cert = json.load(fh)
    fatou_bipartite = bool(core_cert.get("bipartite"))
    graph_block = pack_cert.get("contact_graph", pack_cert)
    packing_odd = graph_block.get("odd_cycle_length")
    packing_bipartite = bool(graph_block.get("bipartite"))

    if fatou_bipartite and not packing_bipartite:
        verdict = "non-equivalent: bipartite vs odd cycle"
        equivalent_possible = False
    else:
        verdict = "inconclusive: parity does not separate the two graphs"
        equivalent_possible = True
    sib = core_cert.get("sibling_report") or {}
    note = (
        "Fatou-side shortest anchored cycles obey the sibling pattern for "
        f"type {sib.get('type', '?')}; a triangle-bearing contact graph "
        "admits no such pattern."
        if sib else "no sibling report present in the core certificate")
    _emit_json(args, {
        "verdict": verdict,
        "fatou_bipartite": fatou_bipartite,
        "packing_odd_cycle_length": packing_odd,
        "sibling_note": note,
    })
    return 0 if not equivalent_possible else 1


if __name__ == "__main__":
    sys.exit(main())
