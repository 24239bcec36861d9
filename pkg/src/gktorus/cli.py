"""Command-line front end: ``gktorus <command> [config] [options]``.

Exit codes: 0 all checks pass, 1 some check failed, 2 non-admissible matrix,
64 usage error (bad arguments, unreadable or malformed config).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from importlib import resources
from pathlib import Path

from . import cohomology as coh
from . import formality as fm
from . import gk, inoue
from .report import Check, RunReport, dumps, exact_check, fmt
from .symforms import parse_sexpr

EXIT_OK, EXIT_FAIL, EXIT_NOT_ADMISSIBLE, EXIT_USAGE = 0, 1, 2, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def thread_cap() -> int:
    raw = os.environ.get("GKTORUS_THREADS", "")
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError as exc:
        raise UsageError(f"GKTORUS_THREADS must be a positive integer, got {raw!r}") from exc
    if n < 1:
        raise UsageError("GKTORUS_THREADS must be a positive integer")
    return n


def _pmap(fn, items):
    """Map preserving order, using at most GKTORUS_THREADS workers."""
    n = thread_cap()
    if n == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


# -- config loading ----------------------------------------------------------------


def shipped_configs() -> list[str]:
    return sorted(p.name[:-5] for p in resources.files("gktorus.data").iterdir() if p.name.endswith(".json"))


def load_config(ref: str) -> dict:
    """Read a JSON config from a path, or a shipped config by name."""
    path = Path(ref)
    try:
        if path.exists():
            text = path.read_text()
        else:
            name = ref[:-5] if ref.endswith(".json") else ref
            res = resources.files("gktorus.data") / f"{name}.json"
            if not res.is_file():
                raise UsageError(f"no such config file or shipped config: {ref}")
            text = res.read_text()
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed JSON in {ref}: {exc}") from exc
    except OSError as exc:
        raise UsageError(f"cannot read {ref}: {exc}") from exc
    if not isinstance(doc, dict):
        raise UsageError(f"config {ref} must be a JSON object")
    return doc


def _int_matrix(obj, n: int | None, what: str) -> list[list[int]]:
    if isinstance(obj, dict) and "matrix" in obj:
        obj = obj["matrix"]
    ok = isinstance(obj, list) and all(isinstance(r, list) for r in obj)
    if ok:
        ok = all(isinstance(x, int) and not isinstance(x, bool) for r in obj for x in r)
    if ok and n is not None:
        ok = len(obj) == n and all(len(r) == n for r in obj)
    if ok and n is None:
        ok = all(len(r) == len(obj) for r in obj)
    if not ok:
        size = f"{n}x{n} " if n else "square "
        raise UsageError(f"{what} must be a {size}integer matrix")
    return obj


def _require(doc: dict, key: str, where: str):
    if key not in doc:
        raise UsageError(f"{where}: missing required field {key!r}")
    return doc[key]


# -- commands ----------------------------------------------------------------------


def cmd_solve_inoue(args) -> tuple[RunReport, int]:
    if args.enumerate:
        m_lo, m_hi, n_lo, n_hi = args.enumerate
        found = inoue.enumerate_admissible((m_lo, m_hi), (n_lo, n_hi))
        rep = RunReport("solve-inoue", {"enumerate": [m_lo, m_hi, n_lo, n_hi]})
        datas = _pmap(inoue.parameters_from_matrix, found)
        worst = max((d.residual for d in datas), default=0.0)
        rep.add(Check("residual", "max |rho(t0) P - P A| over enumerated matrices", worst, 1e-8))
        rep.results["admissible"] = [{"m": a.m, "n": a.n, "t0": fmt(d.t0), "p": fmt(d.p), "residual": fmt(d.residual)}
                                     for a, d in zip(found, datas)]
        rep.results["count"] = len(found)
        return rep, EXIT_OK if rep.passed else EXIT_FAIL
    if not args.config:
        raise UsageError("solve-inoue needs a matrix file or --enumerate M_LO M_HI N_LO N_HI")
    doc = load_config(args.config)
    A = _int_matrix(doc, 3, "matrix")
    rep = RunReport("solve-inoue", {"matrix": A})
    cls = inoue.classify_spectrum(A)
    if not cls.admissible:
        rep.results["admissible"] = False
        rep.results["reason"] = cls.reason
        rep.add(exact_check("admissible", f"matrix is admissible ({cls.reason})", False))
        return rep, EXIT_NOT_ADMISSIBLE
    data = inoue.parameters_from_matrix(A)
    rep.results.update(data.to_json())
    rep.results["admissible"] = True
    rep.add(Check("residual", "|rho(t0) P - P A|_inf", data.residual, 1e-8))
    rep.add(Check("modulus", "|beta| = e^{-t0/2}", abs(abs(data.A.beta) - math.exp(-data.t0 / 2)), 1e-10))
    return rep, EXIT_OK if rep.passed else EXIT_FAIL


def build_from_config(doc: dict, grid: int, tol: float):
    """Inoue data, frame, fiber and fiber map from a verify-gk config."""
    A = _int_matrix(_require(doc, "inoue", "config"), 3, "inoue matrix")
    cls = inoue.classify_spectrum(A)
    if not cls.admissible:
        return None, cls.reason
    data = inoue.parameters_from_matrix(A)
    params = {"p": data.p, "t0": data.t0}
    if "frame" in doc:
        fr = doc["frame"]
        if not isinstance(fr, dict):
            raise UsageError("frame must be an object with a1, b2, b3")
        try:
            exprs = [parse_sexpr(_require(fr, k, "frame"), params) for k in ("a1", "b2", "b3")]
        except (ValueError, KeyError) as exc:
            raise UsageError(f"bad frame expression: {exc}") from exc
        frame = gk.FrameFamily(*exprs, period=data.t0)
    else:
        frame = gk.inoue_frame(data)
    fib = doc.get("fiber", {"mode": "kahler", "k": 1})
    try:
        fiber = gk.FlatFiber(int(fib.get("k", 1)), fib.get("mode", "kahler"))
    except (ValueError, TypeError, AttributeError) as exc:
        raise UsageError(f"bad fiber: {exc}") from exc
    psi = gk.FiberMap.of(_int_matrix(doc["psi"], fiber.dim, "psi")) if "psi" in doc else gk.FiberMap.identity(fiber.dim)
    return (data, frame, fiber, psi), None


def cmd_verify_gk(args) -> tuple[RunReport, int]:
    doc = load_config(_config_arg(args))
    grid = args.grid if args.grid is not None else int(doc.get("grid", 33))
    built, reason = build_from_config(doc, grid, args.tol)
    rep = RunReport("verify-gk", {"config": doc, "grid": grid, "tol": args.tol})
    if built is None:
        rep.results["reason"] = reason
        rep.add(exact_check("admissible", f"matrix is admissible ({reason})", False))
        return rep, EXIT_NOT_ADMISSIBLE
    data, frame, fiber, psi = built
    try:
        s = gk.assemble_gk(frame, fiber, psi, data, grid, args.tol)
    except gk.AssemblyError as exc:
        for c in exc.failures:
            rep.add(c)
        rep.results["assembled"] = False
        return rep, EXIT_FAIL
    except gk.DegenerateFrame as exc:
        rep.add(exact_check("frame", str(exc), False))
        return rep, EXIT_FAIL
    for c in s.preconditions:
        rep.add(c)
    for c in gk.verify_gk(s, grid, args.tol):
        rep.add(c)
    split = gk.classify_split(s)
    expected = doc.get("expect_split")
    if expected is not None:
        rep.add(exact_check("split_class", f"structure is {expected}", split.kind == expected))
    if split.kind == "non_split":
        rep.add(exact_check("sigma", "sigma = -omega_3^{-1} on the fiber block", bool(split.sigma_is_minus_omega3_inverse)))
    rep.results["structure"] = s.to_json()
    rep.results["split"] = split.kind
    rep.results["torsion"] = gk.torsion_report(s)
    rep.results["torsion_constant"] = fmt(gk.torsion_value(frame))
    return rep, EXIT_OK if rep.passed else EXIT_FAIL


def _actions_from(doc: dict):
    A = _int_matrix(_require(doc, "rho", "config"), 3, "rho")
    rho = coh.PullbackAction.from_coordinate_map(A, ["x1", "x2", "x3"])
    if "psi" in doc:
        P = _int_matrix(doc["psi"], None, "psi")
        psi = coh.PullbackAction.from_coordinate_map(P, [f"y{i}" for i in range(1, len(P) + 1)])
    else:
        psi = coh.PullbackAction(())
    return A, rho, psi


def cmd_cohomology(args) -> tuple[RunReport, int]:
    doc = load_config(_config_arg(args))
    A, rho, psi = _actions_from(doc)
    rep = RunReport("cohomology", {"config": doc})
    cls = inoue.classify_spectrum(A)
    total = rho.product(psi) if psi.n else rho
    table = coh.torus_mapping_cohomology(total)
    rep.results["dims"] = list(table.dims)
    rep.results["bases"] = [list(b) for b in table.bases]
    rep.add(exact_check("euler", "Euler characteristic is 0", table.euler == 0))
    rep.add(exact_check("duality", "Poincare duality dims[r] = dims[n+1-r]", table.poincare_symmetric()))
    if psi.n:
        split = []
        for r in range(total.n + 1):
            fixed = coh.tensor_fixed_spaces(rho, psi, r)
            split.append({f"{i},{j}": v for (i, j), v in fixed.items()})
        rep.results["tensor_fixed_spaces"] = split
        ker = [sum(v["direct"] for v in d.values()) for d in split]
        via_tensor = [ker[r] if r <= total.n else 0 for r in range(total.n + 2)]
        via_tensor = [via_tensor[r] + (ker[r - 1] if r >= 1 else 0) for r in range(total.n + 2)]
        rep.add(exact_check("tensor_route", "K^r + C^{r-1} from tensor fixed spaces matches", tuple(via_tensor) == table.dims))
        rep.results["factorization_agrees"] = all(v["agree"] for d in split for v in d.values())
        rep.results["b1"] = coh.b1_parity_report(rho, psi, diagnostic=not cls.admissible)
        ident = all(psi.B[i][j] == (i == j) for i in range(psi.n) for j in range(psi.n))
        if ident:
            fiber = coh.CohomologyTable(tuple(math.comb(psi.n, k) for k in range(psi.n + 1)))
            kun = coh.kunneth(coh.torus_mapping_cohomology(rho, False), fiber)
            rep.add(exact_check("kunneth", "product case agrees with the Kunneth convolution", kun.dims == table.dims))
    if "expected" in doc:
        rep.add(exact_check("expected", f"dims equal {doc['expected']}", list(table.dims) == list(doc["expected"])))
    return rep, EXIT_OK if rep.passed else EXIT_FAIL


def _cdga(doc, where: str) -> fm.CDGA:
    if doc == "lambda_presentation":
        return fm.lambda_presentation()
    if doc == "sm":
        return fm.sm_model()
    if isinstance(doc, dict) and doc.get("inoue_invariant_forms"):
        A = _int_matrix(doc["inoue_invariant_forms"], 3, "inoue_invariant_forms")
        return fm.inoue_invariant_algebra(inoue.parameters_from_matrix(A).p)
    if not isinstance(doc, dict):
        raise UsageError(f"{where} must be a CDGA presentation")
    try:
        return fm.CDGA.from_json(doc)
    except fm.CDGAError as exc:
        raise UsageError(f"{where}: {exc}") from exc


def cmd_formality(args) -> tuple[RunReport, int]:
    doc = load_config(_config_arg(args))
    rep = RunReport("formality", {"config": doc})
    if "jordan_criteria" in doc:
        _, rho, psi = _actions_from(doc["jordan_criteria"])
        total = rho.product(psi) if psi.n else rho
        record = fm.bfm_formality_test(total.actions())
        rep.results["jordan_criteria"] = record
        if "expect_verdict" in doc["jordan_criteria"]:
            rep.add(exact_check("jordan_criteria", f"verdict is {doc['jordan_criteria']['expect_verdict']}",
                                record["verdict"] == doc["jordan_criteria"]["expect_verdict"]))
    if "cdga" in doc:
        A = _cdga(doc["cdga"], "cdga")
        max_degree = int(doc.get("max_degree", 8))
        try:
            H = fm.cdga_cohomology(A, max_degree)
        except fm.CDGAError as exc:
            raise UsageError(str(exc)) from exc
        rep.results["cohomology"] = H.to_json()
        if "expected" in doc:
            exp = list(doc["expected"])[: max_degree + 1]
            rep.add(exact_check("dims", f"cohomology dims equal {exp}", list(H.dims) == exp))
        if "morphism" in doc:
            target = A if doc.get("target", "self") == "self" else _cdga(doc["target"], "target")
            mode = doc.get("mode", "cohomology")
            try:
                v = fm.check_quasi_iso(A, target, doc["morphism"], max_degree, mode)
            except fm.CDGAError as exc:
                raise UsageError(str(exc)) from exc
            rep.results["quasi_iso"] = v.to_json()
            rep.add(exact_check("chain_map", "morphism is compatible with the differentials", v.chain_map))
            rep.add(exact_check("quasi_iso", f"induced map is an isomorphism in degrees 0..{max_degree}",
                                v.is_quasi_iso))
    if not rep.checks and not rep.results:
        raise UsageError("formality config needs a 'cdga' or 'jordan_criteria' section")
    return rep, EXIT_OK if rep.passed else EXIT_FAIL


def _hodge(doc, where: str) -> coh.HodgeTable:
    if doc == "inoue":
        return coh.inoue_hodge()
    if doc == "point":
        return coh.point_hodge()
    if isinstance(doc, dict) and "torus" in doc:
        return coh.torus_hodge(int(doc["torus"]))
    if isinstance(doc, dict) and "h" in doc:
        try:
            return coh.HodgeTable(int(doc.get("n", len(doc["h"]) - 1)), tuple(map(tuple, doc["h"])))
        except (ValueError, TypeError) as exc:
            raise UsageError(f"{where}: {exc}") from exc
    raise UsageError(f"{where} must be 'inoue', 'point', {{'torus': n}} or {{'h': [[...]]}}")


def cmd_borel(args) -> tuple[RunReport, int]:
    doc = load_config(_config_arg(args))
    if args.degenerate and not (args.justification or "").strip():
        raise UsageError("--degenerate requires --justification TEXT")
    base = _hodge(_require(doc, "base", "config"), "base")
    fiber = _hodge(_require(doc, "fiber", "config"), "fiber")
    page = coh.borel_e2(base, fiber)
    col = coh.collapse(page, args.degenerate, args.justification or "")
    rep = RunReport("borel", {"config": doc, "degenerate": args.degenerate, "justification": args.justification})
    rep.results["page"] = page.to_json()
    rep.results["collapsed"] = col.to_json()
    if doc.get("product", False):
        kun = coh.bigraded_kunneth(base, fiber)
        rep.add(exact_check("kunneth", "collapsed page equals bigraded Kunneth", kun == col.table))
    if "expected" in doc:
        for key, val in doc["expected"].items():
            p, q = (int(x) for x in key.split(","))
            rep.add(exact_check(f"h{p}{q}", f"h^{{{p},{q}}} = {val}", col.table[p, q] == val))
    return rep, EXIT_OK if rep.passed else EXIT_FAIL


SHIPPED_CHECKS = [
    ("solve-inoue", "inoue_1_0"),
    ("verify-gk", "standard_split"),
    ("verify-gk", "standard_nonsplit"),
    ("verify-gk", "identity_fiber_map"),
    ("verify-gk", "quaternionic_fiber_map"),
    ("cohomology", "inoue_surface"),
    ("cohomology", "identity_fiber_map_cohomology"),
    ("cohomology", "quaternionic_fiber_map_cohomology"),
    ("formality", "sm_model"),
    ("formality", "lambda_presentation"),
    ("formality", "inoue_jordan_criteria"),
    ("borel", "inoue_torus4"),
]


def cmd_all(args) -> tuple[RunReport, int]:
    rep = RunReport("all-paper-checks", {"configs": [c for _, c in SHIPPED_CHECKS], "grid": args.grid, "tol": args.tol})

    def run(item):
        cmd, cfg = item
        sub = argparse.Namespace(**vars(args))
        sub.config, sub.enumerate, sub.command = cfg, None, cmd
        if cmd == "borel":
            sub.degenerate = True
            sub.justification = ("holomorphic fiber bundle; d2 acts as id (x) d2 on the fiber factor, "
                                 "which vanishes on Dolbeault classes of the Kahler fiber")
        return COMMANDS[cmd](sub)

    for (cmd, cfg), (sub, code) in zip(SHIPPED_CHECKS, _pmap(run, SHIPPED_CHECKS)):
        # summarize by the worst sub-check: failures first, then largest residual
        worst = max(sub.checks, key=lambda c: (not c.passed, c.max_residual))
        rep.add(Check(f"{cmd}:{cfg}", f"{len(sub.checks)} checks, exit {code}, worst {worst.item}",
                      worst.max_residual, worst.tolerance, code == EXIT_OK))
        rep.results[f"{cmd}:{cfg}"] = sub.to_json()
    return rep, EXIT_OK if rep.passed else EXIT_FAIL


COMMANDS = {
    "solve-inoue": cmd_solve_inoue,
    "verify-gk": cmd_verify_gk,
    "cohomology": cmd_cohomology,
    "formality": cmd_formality,
    "borel": cmd_borel,
    "all-paper-checks": cmd_all,
}


def _config_arg(args) -> str:
    if not args.config:
        raise UsageError(f"{args.command} needs a config file (or a shipped config name: {', '.join(shipped_configs())})")
    return args.config


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--grid", type=int, default=None, help="number of time samples (default 33)")
    common.add_argument("--tol", type=float, default=1e-9, help="tolerance for grid identities (default 1e-9)")
    common.add_argument("--json", metavar="PATH", help="write the JSON report to PATH ('-' for stdout)")
    common.add_argument("--timing", action="store_true", help="include wall-clock time in the JSON report")
    p = _Parser(prog="gktorus", description="Generalized Kahler mapping tori: construction and verification.")
    subs = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    s = subs.add_parser("solve-inoue", parents=[common], help="Inoue parameters of an integer matrix")
    s.add_argument("config", nargs="?", help="JSON file with a 3x3 integer matrix")
    s.add_argument("--enumerate", nargs=4, type=int, metavar=("M_LO", "M_HI", "N_LO", "N_HI"))
    for name, helptext in (("verify-gk", "assemble and certify a generalized Kahler structure"),
                           ("cohomology", "de Rham cohomology of a mapping torus"),
                           ("formality", "CDGA cohomology, quasi-isomorphisms and Jordan-block non-formality criteria"),
                           ("borel", "Borel E2 page and its collapse")):
        s = subs.add_parser(name, parents=[common], help=helptext)
        s.add_argument("config", nargs="?", help="JSON config path or shipped config name")
        if name == "borel":
            s.add_argument("--degenerate", action="store_true", help="declare d2 = 0 (needs --justification)")
            s.add_argument("--justification", default=None)
    subs.add_parser("all-paper-checks", parents=[common], help="run every shipped example")
    return p


def _render(rep: RunReport, code: int) -> str:
    lines = rep.summary_lines()
    res = rep.results
    if "dims" in res:
        lines.insert(0, "dims: " + " ".join(str(d) for d in res["dims"]))
    if "reason" in res:
        lines.insert(0, f"not admissible: {res['reason']}")
    if "collapsed" in res:
        h = res["collapsed"]["table"]["h"]
        lines.insert(0, "h^{p,q} (rows p, columns q), " + res["collapsed"]["status"])
        for i, row in enumerate(h):
            lines.insert(1 + i, "  " + " ".join(f"{x:3d}" for x in row))
    if "cohomology" in res:
        lines.insert(0, "cdga dims: " + " ".join(str(d) for d in res["cohomology"]["dims"]))
    if "quasi_iso" in res and res["quasi_iso"].get("first_failure") is not None:
        lines.insert(0, f"induced map first fails to be an isomorphism in degree {res['quasi_iso']['first_failure']}")
    if "t0" in res:
        lines.insert(0, f"t0 = {res['t0']}  p = {res['p']}  residual = {res['residual']}")
    return "\n".join(lines)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.grid is None and args.command != "verify-gk":
        args.grid = 33
    if args.grid is not None and args.grid < 2:
        parser.error("--grid must be at least 2")
    start = time.perf_counter()
    try:
        thread_cap()
        if args.command == "all-paper-checks":
            args.grid = args.grid or 33
            args.config = None
            args.enumerate = None
        rep, code = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"gktorus: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.timing:
        rep.timing = time.perf_counter() - start
    text = dumps(rep.to_json())
    if args.json == "-":
        print(text)
    else:
        print(_render(rep, code))
        if args.json:
            Path(args.json).write_text(text + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
