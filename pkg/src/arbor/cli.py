"""Deterministic JSON reports over trees, orbit relations, and vectors.

Every subcommand loads a model config (a built-in name or a JSON path),
runs one exact computation, and prints a sorted-key JSON report.  Exit
status 0 means the computation succeeded and any requested verdict holds,
1 means a verdict came back negative, 2 means the input could not be used.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Optional

from . import __version__
from .cber import (
    build_sample_space,
    hyperfiniteness_witness,
    orbit_equivalent,
    validate_witness_chain,
    witness_chain_to_json,
)
from .codes import format_code, parse_code
from .groups import Amalgam, GroupError, make_amalgam, make_group, word_to_str
from .reiter import (
    FreeAction,
    cfw_extract,
    check_uniform_coamenable,
    format_fraction,
    free_tree_window,
    grid_search_min_deviation,
    integer_window,
    reiter_lp,
    tensor_from_json,
    verify_cfw,
)
from .tree import (
    build_tree,
    check_acylindricity,
    check_theorem_A,
    ray_stabilizer,
    to_dot,
)


class ConfigError(ValueError):
    """A config document that cannot be turned into a model."""


_LIMIT_DEFAULTS = {
    "tree_radius": 4,
    "vertex_cap": 100_000,
    "word_bound": 4,
    "p_max": 1,
    "q_max": 4,
    "n_max": 8,
    "lp_denominator": 20,
}


def _config_text(source: str) -> str:
    path = Path(source)
    if source.endswith(".json") or path.exists():
        try:
            return path.read_text()
        except OSError as err:
            raise ConfigError(f"cannot read {source}: {err}")
    try:
        return resources.files("arbor.configs").joinpath(
            f"{source}.json").read_text()
    except FileNotFoundError:
        raise ConfigError(
            f"unknown config {source!r}: neither a file nor a built-in name")


def load_config(source: str) -> tuple[Amalgam, dict]:
    """Model and limits from a built-in name or a JSON file path.

    The ARBOR_VERTEX_CAP environment variable overrides limits.vertex_cap.
    Errors carry the dotted path of the offending key.
    """
    try:
        doc = json.loads(_config_text(source))
    except json.JSONDecodeError as err:
        raise ConfigError(f"{source}: invalid JSON: {err}")
    if not isinstance(doc, dict):
        raise ConfigError(f"{source}: top level must be an object")
    model = doc.get("model")
    if not isinstance(model, dict):
        raise ConfigError("model: missing or not an object")
    groups = {}
    for key in ("h", "k", "c"):
        if key not in model:
            raise ConfigError(f"model.{key}: missing group spec")
        try:
            groups[key] = make_group(model[key])
        except GroupError as err:
            raise ConfigError(f"model.{key}: {err}")
    for key in ("embed_h", "embed_k"):
        images = model.get(key)
        if not isinstance(images, list) \
                or not all(isinstance(v, int) for v in images):
            raise ConfigError(f"model.{key}: need a list of element indices")
    try:
        am = make_amalgam(groups["h"], groups["k"], groups["c"],
                          model["embed_h"], model["embed_k"])
    except GroupError as err:
        raise ConfigError(f"model: {err}")
    limits = dict(_LIMIT_DEFAULTS)
    extra = doc.get("limits", {})
    if not isinstance(extra, dict):
        raise ConfigError("limits: must be an object")
    for key, value in extra.items():
        if key not in _LIMIT_DEFAULTS:
            raise ConfigError(f"limits.{key}: unknown limit")
        if not isinstance(value, int) or value < 0:
            raise ConfigError(f"limits.{key}: need a nonnegative integer")
        limits[key] = value
    cap = os.environ.get("ARBOR_VERTEX_CAP")
    if cap is not None:
        try:
            limits["vertex_cap"] = int(cap)
        except ValueError:
            raise ConfigError(f"ARBOR_VERTEX_CAP: not an integer: {cap!r}")
    return am, limits


def _emit(doc: dict, args) -> None:
    doc = dict(doc)
    doc["tool"] = "arbor"
    doc["version"] = __version__
    doc["config"] = args.config
    if args.timings:
        doc["timings"] = {"seconds": time.perf_counter() - args.started}
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if getattr(args, "out", None):
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _sample_codes(am: Amalgam, limits: dict, args) -> list:
    if args.codes:
        return [parse_code(am, s) for s in args.codes]
    p_max = args.p_max if args.p_max is not None else limits["p_max"]
    q_max = args.q_max if args.q_max is not None else limits["q_max"]
    return list(build_sample_space(am, p_max, q_max).points)


def cmd_tree(am: Amalgam, limits: dict, args) -> int:
    radius = args.radius if args.radius is not None else limits["tree_radius"]
    tree = build_tree(am, radius, limits["vertex_cap"])
    if args.dot:
        Path(args.dot).write_text(to_dot(am, tree))
    _emit({
        "command": "tree",
        "radius": radius,
        "vertices": len(tree.vertices),
        "edges": len(tree.edges),
        "counts_by_distance": tree.counts_by_distance(),
    }, args)
    return 0


def cmd_check(am: Amalgam, limits: dict, args) -> int:
    if args.what == "acylindrical":
        report = check_acylindricity(am, args.seg_length,
                                     vertex_cap=limits["vertex_cap"])
        ok = args.bound is None or report.max_order <= args.bound
        _emit({
            "command": "check",
            "what": "acylindrical",
            "seg_length": report.seg_length,
            "tree_radius": report.tree_radius,
            "segments": report.segments,
            "orders": [list(pair) for pair in report.orders_histogram],
            "max_order": report.max_order,
            "ok": ok,
        }, args)
        return 0 if ok else 1
    codes = _sample_codes(am, limits, args)
    if args.what == "stabilizers":
        rows = []
        for x in codes:
            words = ray_stabilizer(am, x)
            rows.append({
                "code": format_code(am, x),
                "order": len(words),
                "elements": [word_to_str(am, w) for w in words],
            })
        _emit({"command": "check", "what": "stabilizers", "rows": rows}, args)
        return 0
    rows = []
    all_certified = True
    for x in codes:
        cert = check_theorem_A(am, x, args.max_len)
        if cert is None:
            all_certified = False
            rows.append({"code": format_code(am, x), "certified": False})
        else:
            rows.append({
                "code": format_code(am, x),
                "certified": True,
                "sigma_length": cert.sigma_length,
                "order": cert.order,
                "ray_order": len(cert.ray_stabilizer),
            })
    _emit({
        "command": "check",
        "what": "theorem-a",
        "rows": rows,
        "ok": all_certified,
    }, args)
    return 0 if all_certified else 1


def cmd_witness(am: Amalgam, limits: dict, args) -> int:
    p_max = args.p_max if args.p_max is not None else limits["p_max"]
    q_max = args.q_max if args.q_max is not None else limits["q_max"]
    n_max = args.n_max if args.n_max is not None else limits["n_max"]
    sample = build_sample_space(am, p_max, q_max)
    wc = hyperfiniteness_witness(am, sample, n_max)
    validate_witness_chain(wc)
    doc = witness_chain_to_json(am, wc, with_witnesses=not args.no_witnesses)
    doc["command"] = "witness"
    doc["p_max"] = p_max
    doc["q_max"] = q_max
    doc["class_counts"] = [len(classes) for classes in doc["chain"]]
    _emit(doc, args)
    return 0


def cmd_equiv(am: Amalgam, limits: dict, args) -> int:
    x = parse_code(am, args.x)
    y = parse_code(am, args.y)
    bound = args.bound if args.bound is not None else limits["word_bound"]
    decision = orbit_equivalent(am, x, y, word_bound=bound,
                                method="brute" if args.brute else "codes")
    _emit({
        "command": "equiv",
        "x": format_code(am, x),
        "y": format_code(am, y),
        "equivalent": decision.equivalent,
        "conclusive": decision.conclusive,
        "method": decision.method,
        "witness": None if decision.witness is None
        else word_to_str(am, decision.witness),
        "shifts": None if decision.shifts is None else list(decision.shifts),
    }, args)
    return 0 if decision.equivalent else 1


def _reiter_window(am: Amalgam, args):
    if args.window == "z":
        radius = args.radius if args.radius is not None \
            else args.support_size + 2
        steps = (1, -1)
        if args.generators:
            try:
                steps = tuple(int(s) for s in args.generators.split(","))
            except ValueError:
                raise ConfigError(
                    f"generators: need integers, got {args.generators!r}")
        return integer_window(radius, steps), list(range(args.support_size))
    if args.window == "free":
        if args.generators:
            raise ConfigError("generators: the free window always uses all "
                              "letters and inverses")
        window = free_tree_window(args.rank, args.radius)
        support = FreeAction(args.rank, args.radius).ball(args.support_radius)
        return window, support
    raise ConfigError(f"window: unknown kind {args.window!r}")


def _group_gens(group, spec: Optional[str]) -> list:
    if not spec:
        return [g for g in group.elements() if g != 0]
    out = []
    for part in spec.split(","):
        part = part.strip()
        if part.isdigit():
            out.append(int(part))
        else:
            out.append(group.index_of_name(part))
    return out


def cmd_reiter(am: Amalgam, limits: dict, args) -> int:
    if args.window == "group":
        side = 0 if args.side == "h" else 1
        group = am.side_group(side)
        image = sorted({am.embed_to_side(side, c)
                        for c in range(am.C.order)})
        gens = _group_gens(group, args.generators)
        eps = args.target if args.target is not None else Fraction(1, 100)
        cert = check_uniform_coamenable(group, image, gens, eps)
        _emit({
            "command": "reiter",
            "window": "group",
            "side": args.side,
            "epsilon": format_fraction(cert.epsilon),
            "max_deviation": format_fraction(cert.max_deviation),
            "per_gen": [[group.name(s), format_fraction(d)]
                        for s, d in cert.per_gen],
            "ok": True,
        }, args)
        return 0
    window, support = _reiter_window(am, args)
    res = reiter_lp(window, support, target_eps=args.target)
    doc = {
        "command": "reiter",
        "window": args.window,
        "support_size": len(support),
        "optimum": format_fraction(res.optimum),
        "p": {str(v): format_fraction(q) for v, q in res.p.items()},
        "per_gen": [[str(g), format_fraction(d)] for g, d in res.per_gen],
    }
    if args.target is not None:
        doc["target"] = format_fraction(args.target)
        doc["ok"] = bool(res.meets_target)
    if args.grid_check:
        denom = args.denominator if args.denominator is not None \
            else limits["lp_denominator"]
        value, _ = grid_search_min_deviation(window, support, denom)
        doc["grid"] = {
            "denominator": denom,
            "value": format_fraction(value),
            "matches_lp": value == res.optimum,
        }
    _emit(doc, args)
    if args.target is not None and not res.meets_target:
        return 1
    return 0


def cmd_cfw(am: Amalgam, limits: dict, args) -> int:
    if args.tensor:
        text = Path(args.tensor).read_text()
    else:
        text = resources.files("arbor.configs").joinpath(
            "monotone_tensor.json").read_text()
    try:
        tensor = tensor_from_json(json.loads(text))
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as err:
        raise ConfigError(f"tensor: {err}")
    extraction = cfw_extract(tensor, args.m_max)
    verify_cfw(extraction)
    _emit({
        "command": "cfw",
        "m_max": extraction.m_max,
        "thresholds": list(extraction.thresholds),
        "rows": [{
            "i": row.i,
            "f": row.f,
            "late_mass": format_fraction(row.bad_mass),
            "bound": format_fraction(row.bound),
            "ok": row.ok,
        } for row in extraction.rows],
        "ok": True,
    }, args)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default="sl2z",
                        help="built-in model name or a JSON config path")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--timings", action="store_true",
                        help="include wall-clock timings in the report")

    parser = argparse.ArgumentParser(
        prog="arbor",
        description="Exact computations on trees of amalgams, their boundary "
                    "orbit relations, and almost-invariant vectors.",
    )
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("tree", parents=[common],
                       help="build a truncated tree and report its profile")
    p.add_argument("--radius", type=int, help="ball radius around the base")
    p.add_argument("--dot", help="also write Graphviz source to this path")

    p = sub.add_parser("check", parents=[common],
                       help="certificates and stabilizer surveys")
    p.add_argument("--what", required=True,
                   choices=["theorem-a", "acylindrical", "stabilizers"])
    p.add_argument("--codes", action="append",
                   help="boundary code (repeatable); default is the sample space")
    p.add_argument("--p-max", type=int, help="sample prefix cap")
    p.add_argument("--q-max", type=int, help="sample cycle cap")
    p.add_argument("--max-len", type=int,
                   help="segment length cap for theorem-a")
    p.add_argument("--seg-length", type=int, default=2,
                   help="segment length for acylindrical")
    p.add_argument("--bound", type=int,
                   help="acylindrical verdict fails above this order")

    p = sub.add_parser("witness", parents=[common],
                       help="build and validate a finite witness chain")
    p.add_argument("--p-max", type=int)
    p.add_argument("--q-max", type=int)
    p.add_argument("--n-max", type=int)
    p.add_argument("--no-witnesses", action="store_true",
                   help="omit per-point orbit witnesses from the report")

    p = sub.add_parser("equiv", parents=[common],
                       help="decide orbit equivalence of two boundary codes")
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--bound", type=int, help="word length bound (brute mode)")
    p.add_argument("--brute", action="store_true",
                   help="search words directly instead of comparing codes")

    p = sub.add_parser("reiter", parents=[common],
                       help="minimize worst-case deviation on a finite window")
    p.add_argument("--window", required=True, choices=["z", "free", "group"])
    p.add_argument("--radius", type=int, help="window radius")
    p.add_argument("--support-size", type=int, default=10,
                   help="interval length for the z window")
    p.add_argument("--rank", type=int, default=2, help="free window rank")
    p.add_argument("--support-radius", type=int, default=2,
                   help="support ball radius for the free window")
    p.add_argument("--side", choices=["h", "k"], default="k",
                   help="finite factor for the group window")
    p.add_argument("--generators",
                   help="comma-separated steps (z) or element names (group); "
                        "free-window generators are fixed")
    p.add_argument("--target", type=Fraction,
                   help="verdict epsilon, e.g. 1/3")
    p.add_argument("--grid-check", action="store_true",
                   help="cross-check the optimum against a denominator grid")
    p.add_argument("--denominator", type=int,
                   help="grid denominator cap for --grid-check")

    p = sub.add_parser("cfw", parents=[common],
                       help="threshold extraction from a deviation tensor")
    p.add_argument("--tensor", help="tensor JSON path (default: built-in)")
    p.add_argument("--m-max", type=int, help="band count per group element")

    return parser


_HANDLERS = {
    "tree": cmd_tree,
    "check": cmd_check,
    "witness": cmd_witness,
    "equiv": cmd_equiv,
    "reiter": cmd_reiter,
    "cfw": cmd_cfw,
}


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return 0
    args.started = time.perf_counter()
    try:
        am, limits = load_config(args.config)
        return _HANDLERS[args.command](am, limits, args)
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except RuntimeError as err:
        print(f"failed: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
