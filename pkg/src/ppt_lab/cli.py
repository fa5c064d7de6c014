"""Command-line front end.

Every subcommand reads a :class:`RunConfig` (config file, then flags) and
emits one report on stdout or ``--output``.  Exit codes: 0 success,
2 validation error, 3 resource budget exceeded, 4 undetermined result.
"""

from __future__ import annotations

import argparse
import sys

from . import __version__
from . import actions as A
from . import analysis as AN
from . import groups as G
from . import oracle as O
from . import product as P
from .config import ConfigError, RunConfig, read_config_file
from .serialize import envelope, render

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_BUDGET = 3
EXIT_UNDETERMINED = 4


def _fmt(g):
    return G.format_element(g)


def _num(x):
    return float(x) if isinstance(x, float) else x


# --------------------------------------------------------------------------
# subcommands; each returns (result, exit_status)


def cmd_nf(cfg):
    group = cfg.build_group()
    cfg.require("element")
    g = group.parse_element(cfg.element)
    if isinstance(group, G.BaumslagSolitar):
        nf = G.bs_normal_form(g)
        result = {"structure": "t^-i a^m t^j", "i": nf.i, "m": nf.stem, "j": nf.j}
    elif isinstance(group, G.Lamplighter):
        if cfg.side == "right":
            nf = G.lamplighter_nf_right(g)
            result = {"structure": "t^-k (A-stem) t^m", "k_R": nf.i, "m_R": nf.j,
                      "stem": list(nf.stem)}
        else:
            nf = G.lamplighter_nf_left(g)
            result = {"structure": "s^-k (B-stem) s^m, s = t^-1", "k_L": nf.i,
                      "m_L": nf.j, "stem": list(nf.stem)}
    else:
        raise ConfigError("normal forms exist for the lamplighter and BS(1,n) only")
    result.update({
        "element": _fmt(g),
        "reduced": nf.is_reduced(),
        "displacement": nf.displacement,
        "roundtrip": G.evaluate_normal_form(nf, group) == g,
    })
    return result, EXIT_OK


def cmd_disp(cfg):
    group = cfg.build_group()
    cfg.require("element")
    g = group.parse_element(cfg.element)
    rows = []
    for act in cfg.action_list(group):
        ell = A.translation_length(act, g)
        if not ell.determined:
            raise A.Undetermined(f"translation length of {_fmt(g)} undetermined")
        rows.append({
            "space": act.kind,
            "displacement": _num(A.displacement(act, g)),
            "translation_length": _num(ell.value),
            "type": A.classify_element(act, g),
        })
    result = {"element": _fmt(g), "rows": rows}
    if len(rows) > 1:
        result["l1_displacement"] = _num(sum(r["displacement"] for r in rows))
    return result, EXIT_OK


def cmd_audit(cfg):
    group = cfg.build_group()
    cfg.require("L", "r")
    report = P.properness_audit(cfg.product(group), cfg.generators(group), cfg.L, cfg.r,
                                delta=cfg.delta, budget=cfg.budget or G.DEFAULT_BALL_BUDGET)
    result = report.to_dict()
    result["factors"] = [f.kind for f in cfg.product(group).factors]
    status = EXIT_UNDETERMINED if report.verdict == P.INCONCLUSIVE else EXIT_OK
    return result, status


def cmd_classify(cfg):
    group = cfg.build_group()
    gens = cfg.generators(group)
    W = cfg.W or 4
    out = []
    for act in cfg.action_list(group):
        entry = AN.classify_action(act, gens, W=W).to_dict()
        entry["space"] = act.kind
        out.append(entry)
    return {"generators": [_fmt(s) for s in gens], "W": W, "factors": out}, EXIT_OK


def cmd_tits(cfg):
    group = cfg.build_group()
    gens = cfg.generators(group)
    alpha = group.parse_element(cfg.alpha) if cfg.alpha else None
    report = AN.tits_report(cfg.product(group), gens, W=cfg.W or 4, alpha=alpha)
    result = report.to_dict()
    result["generators"] = [_fmt(s) for s in gens]
    status = EXIT_UNDETERMINED if report.verdict == "undecided" else EXIT_OK
    return result, status


def cmd_busemann(cfg):
    group = cfg.build_group()
    elems = cfg.element_list(group, cfg.element) if cfg.element else cfg.generators(group)
    rows, ends = [], []
    for act in cfg.action_list(group):
        end = A.default_end(act)
        ends.append({"space": act.kind, **end.describe()})
        for g in elems:
            rows.append({
                "space": act.kind,
                "element": _fmt(g),
                "busemann": _num(A.busemann(act, end, g)),
            })
    return {"ends": ends, "rows": rows}, EXIT_OK


def cmd_confining(cfg):
    if cfg.group not in (None, "lamplighter"):
        raise ConfigError("the confining check is implemented for the lamplighter only")
    H, alpha, in_A = AN.lamplighter_confining_instance(
        radius=cfg.radius, r0=cfg.r0, reverse=cfg.reverse,
        max_lamps=cfg.max_lamps, samples=cfg.samples, seed=cfg.seed)
    report = AN.confining_check(H, alpha, in_A, N=cfg.N or 80, n0_max=cfg.n0_max)
    result = report.to_dict()
    result["instance"] = {
        "H": "lamp configurations (shift 0)",
        "alpha": "h -> t^-1 h t" if cfg.reverse else "h -> t h t^-1",
        "A": f"h with d_T1(x, h x) <= {cfg.r0}",
    }
    return result, EXIT_OK


def cmd_rank_obstruction(cfg):
    rows = cfg.rational_matrix()
    ob = AN.rank_obstruction(rows)
    if ob is None:
        return {"obstruction": None, "rows": len(rows), "columns": len(rows[0])}, EXIT_OK
    return {
        "obstruction": {
            "z": [str(c) for c in ob.z],
            "K": str(ob.K),
            "family": ob.family,
            "bound_checked_up_to_n": ob.checked_n,
        },
    }, EXIT_OK


def cmd_pingpong(cfg):
    group = cfg.build_group()
    cfg.require("g", "h")
    act = cfg.single_action(group)
    g, h = group.parse_element(cfg.g), group.parse_element(cfg.h)
    res = AN.pingpong_certify(act, g, h, N=cfg.N or 2, W=cfg.W or 12)
    result = res.to_dict()
    result.update({"space": act.kind, "g": _fmt(g), "h": _fmt(h)})
    return result, EXIT_OK


def cmd_growth(cfg):
    group = cfg.build_group()
    cfg.require("L")
    gens = cfg.generators(group)
    series = AN.growth_series(gens, cfg.L, margin=cfg.margin,
                              budget=cfg.budget or G.DEFAULT_BALL_BUDGET)
    result = series.to_dict()
    result["generators"] = [_fmt(s) for s in gens]
    return result, EXIT_OK


def cmd_stabilizer(cfg):
    group = cfg.build_group()
    cfg.require("L")
    act = cfg.single_action(group)
    ball = G.ball(cfg.generators(group), cfg.L, cfg.budget or G.DEFAULT_BALL_BUDGET)
    found = set(AN.extract_stabilizer(AN.orbit_pairs(act, ball)))
    found.add(group.identity())
    elems = sorted(found, key=lambda g: g.sort_key())
    bad = [g for g in elems if A.displacement(act, g) > A.FLOAT_TOL]
    if bad:
        raise AssertionError(f"{_fmt(bad[0])} does not fix the basepoint")
    return {
        "space": act.kind,
        "L": cfg.L,
        "count": len(elems),
        "elements": [_fmt(g) for g in elems[:50]],
        "listed": min(50, len(elems)),
        "all_fix_basepoint": True,
    }, EXIT_OK


def cmd_oracle_check(cfg):
    group = cfg.build_group()
    cfg.require("L")
    act = cfg.single_action(group)
    depth = cfg.depth if cfg.depth is not None else cfg.L
    graph = O.build_coset_graph(act, depth, cfg.budget or 200_000)
    checked, mismatches = O.check_ball(act, cfg.generators(group), cfg.L, graph=graph)
    if cfg.edges:
        with open(cfg.edges, "w", encoding="utf-8") as fh:
            fh.write(graph.edge_list_text())
    return {
        "space": act.kind,
        "L": cfg.L,
        "depth": depth,
        "vertices": len(graph),
        "edges": sum(1 for _ in graph.edges()),
        "checked": checked,
        "mismatches": len(mismatches),
        "examples": [{"element": _fmt(g), "closed_form": c, "oracle": o}
                     for g, c, o in mismatches[:20]],
        "equivalent": not mismatches,
    }, EXIT_OK


COMMANDS = {
    "nf": (cmd_nf, "HNN normal form of an element",
           ["group", "n", "element", "side"]),
    "disp": (cmd_disp, "displacement and translation length in each space",
             ["group", "n", "rank", "dim", "actions", "element"]),
    "audit": (cmd_audit, "properness audit of an l1-product on a word ball",
              ["group", "n", "rank", "dim", "actions", "gens", "L", "r", "delta", "budget"]),
    "classify": (cmd_classify, "action type of a finitely generated subgroup",
                 ["group", "n", "rank", "dim", "actions", "gens", "W"]),
    "tits": (cmd_tits, "Tits-alternative case for a product of actions",
             ["group", "n", "rank", "dim", "actions", "gens", "W", "alpha"]),
    "busemann": (cmd_busemann, "Busemann values at the globally fixed end",
                 ["group", "n", "rank", "dim", "actions", "element", "gens"]),
    "confining": (cmd_confining, "confining-subset check on a lamp window",
                  ["group", "radius", "r0", "reverse", "max_lamps", "samples", "seed",
                   "N", "n0_max"]),
    "rank-obstruction": (cmd_rank_obstruction,
                         "nullvector and bounded family for quasi-line products of Z^m",
                         ["matrix"]),
    "pingpong": (cmd_pingpong, "certify <g^N, h^N> free by ping-pong",
                 ["group", "n", "rank", "dim", "actions", "g", "h", "N", "W"]),
    "growth": (cmd_growth, "word-ball growth series",
               ["group", "n", "rank", "dim", "gens", "L", "margin", "budget"]),
    "stabilizer": (cmd_stabilizer, "basepoint stabilizer elements in a word ball",
                   ["group", "n", "rank", "dim", "actions", "gens", "L", "budget"]),
    "oracle-check": (cmd_oracle_check, "closed-form displacement against coset enumeration",
                     ["group", "n", "rank", "dim", "actions", "gens", "L", "depth", "edges",
                      "budget"]),
}

FLAG_HELP = {
    "group": "group family: lamplighter, bs, free, zn",
    "n": "BS(1,n) parameter",
    "rank": "free group rank (default 2)",
    "dim": "dimension of Z^dim",
    "actions": "comma list of spaces: t1, t2, tn, h2, cayley, line(c1,...)",
    "element": "element, e.g. 'lamps=2;shift=0', 'k=1;q=1/2', 'x*y^-1'; '|' separates several",
    "gens": "generators, '|'-separated (commas allowed for plain words)",
    "side": "lamplighter HNN structure: right (stable letter t) or left (t^-1)",
    "L": "word-ball radius",
    "r": "comma list of displacement thresholds",
    "delta": "radius gap for the stability comparison (default 2)",
    "W": "word length bound",
    "N": "power (pingpong) or iteration cap (confining)",
    "g": "first element",
    "h": "second element",
    "alpha": "element whose drifts split the focal factors (default: search)",
    "matrix": "rational rows separated by ';', entries by ','",
    "radius": "lamp window half-width (default 32)",
    "r0": "displacement bound defining A (default 2)",
    "reverse": "conjugate by t^-1 instead of t",
    "max_lamps": "exhaustive lamp count in the window (default 2)",
    "samples": "random window configurations (default 200)",
    "seed": "random seed for window samples (default 0)",
    "n0_max": "largest n0 tried for the product condition (default 8)",
    "depth": "oracle exploration depth (default L)",
    "margin": "ratio margin for the exponential-growth flag (default 0.5)",
    "edges": "write the explored tree as a tab-separated edge list",
    "budget": "element or vertex cap before giving up with exit status 3",
}


def _flag(name):
    return "--" + name.replace("_", "-")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ppt-lab", allow_abbrev=False,
        description="Exact group actions on trees, the hyperbolic plane and quasi-lines.")
    parser.add_argument("--version", action="version", version=f"ppt-lab {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True
    for name, (_, summary, keys) in COMMANDS.items():
        p = sub.add_parser(name, help=summary, description=summary, allow_abbrev=False)
        p.add_argument("--config", metavar="PATH", help="flat key = value file; flags win")
        for key in keys:
            flags = [_flag(key)]
            if key == "actions":
                flags.append("--space")
            if key == "reverse":
                p.add_argument(*flags, dest=key, action="store_const", const="true",
                               help=FLAG_HELP[key])
            else:
                p.add_argument(*flags, dest=key, metavar=key.upper() if len(key) > 1 else key,
                               help=FLAG_HELP[key])
        p.add_argument("--format", choices=["json", "csv", "text"], help="output format")
        p.add_argument("--output", metavar="PATH", help="write the report here")
        p.add_argument("--threads", metavar="K", help="worker cap; never changes output")
    return parser


def run(argv=None, stdout=None, stderr=None):
    """Parse, execute and emit; returns the exit status."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_VALIDATION
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    func = COMMANDS[args.command][0]
    try:
        file_values = read_config_file(args.config) if args.config else {}
        cfg = RunConfig.from_sources(file_values, flags)
        result, status = func(cfg)
    except G.ResourceBudgetError as exc:
        print(f"ppt-lab: resource budget exceeded: {exc}", file=stderr)
        return EXIT_BUDGET
    except A.Undetermined as exc:
        print(f"ppt-lab: undetermined: {exc}", file=stderr)
        return EXIT_UNDETERMINED
    except O.OracleRangeError as exc:
        print(f"ppt-lab: oracle depth too small: {exc}", file=stderr)
        return EXIT_BUDGET
    except (ConfigError, G.GroupError, A.ActionError, ValueError) as exc:
        print(f"ppt-lab: error: {exc}", file=stderr)
        return EXIT_VALIDATION
    doc = envelope(args.command, cfg.to_dict(COMMANDS[args.command][2]), result)
    text = render(doc, cfg.format)
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    if status == EXIT_UNDETERMINED:
        print("ppt-lab: result undetermined; see report", file=stderr)
    return status


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
