"""Command-line driver: ``python -m ahplus <command> ...``.

Exit codes: 0 all checks pass, 1 a check failed, 2 bad input or data,
3 the ``--budget`` ran out.
"""

from __future__ import annotations

import argparse
import json
import signal
import sys
import time
from contextlib import contextmanager
from pathlib import Path

from .assets import AssetError, catalog, load_asset
from .connections import Report
from .expr import ExprSyntaxError, parse_scalar
from .scalars import Scalar, ScalarError, set_precision

SCHEMA = "ahplus-report/1"

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2, 3


class BudgetExceeded(Exception):
    pass


class InputError(Exception):
    pass


@contextmanager
def _budget(seconds):
    if not seconds or not hasattr(signal, "SIGALRM"):
        yield
        return

    def on_alarm(signum, frame):
        raise BudgetExceeded(f"budget of {seconds}s exceeded")

    old = signal.signal(signal.SIGALRM, on_alarm)
    signal.setitimer(signal.ITIMER_REAL, seconds)
    try:
        yield
    finally:
        signal.setitimer(signal.ITIMER_REAL, 0)
        signal.signal(signal.SIGALRM, old)


def scalar_json(x) -> dict:
    x = Scalar.coerce(x)
    return {"expr": x.serialize(), "decimal": x.decimal(50)}


def _status(rep: Report, skipped: bool = False) -> str:
    if skipped:
        return "skipped"
    if rep.flagged:
        return "flagged"
    return "pass" if rep.passed else "fail"


class Run:
    def __init__(self, command: str):
        self.command = command
        self.inputs: dict[str, str] = {}
        self.checks: list[dict] = []

    def use(self, *assets: str):
        cat = catalog()
        for a in assets:
            if a in cat:
                self.inputs[a] = cat[a].digest

    def add(self, check_id: str, rep: Report, witnesses: dict | None = None, skipped: bool = False):
        self.checks.append(
            {
                "id": check_id,
                "status": _status(rep, skipped),
                "checked": rep.checked,
                "witnesses": witnesses or {},
                "failures": rep.failures,
                "notes": rep.notes,
            }
        )

    def exit_code(self) -> int:
        return EXIT_FAIL if any(c["status"] == "fail" for c in self.checks) else EXIT_OK

    def to_json(self, wall: float) -> dict:
        return {
            "schema": SCHEMA,
            "command": self.command,
            "inputs": dict(sorted(self.inputs.items())),
            "checks": sorted(self.checks, key=lambda c: c["id"]),
            "wall_time": round(wall, 3),
        }


def _print(run: Run, out):
    for c in sorted(run.checks, key=lambda c: c["id"]):
        print(f"{c['status'].upper():8} {c['id']}  ({c['checked']} checks)", file=out)
        for k, v in c["witnesses"].items():
            v = v["expr"] if isinstance(v, dict) and "expr" in v else v
            print(f"           {k} = {v}", file=out)
        for n in c["notes"]:
            print(f"           {n}", file=out)
        for f in c["failures"][:10]:
            print(f"           ! {json.dumps(f, default=str)}", file=out)
        if len(c["failures"]) > 10:
            print(f"           ! ... {len(c['failures']) - 10} more", file=out)


# ---------------------------------------------------------------------------
# verify


def _ahp1():
    from . import ahp1

    return ahp1


def cmd_verify(args, run: Run):
    ahp1 = _ahp1()
    what = args.what
    run.use("ahp1.kappa.connection", "ahp1.kappa.fourgraph", "ahp1.principal.graph", "ahp1.dual.graph")
    if what == "kappa":
        run.add("kappa.biunitary", ahp1.verify_kappa())
    elif what == "appendix-unitarity":
        name = "ahp1.appendixA-corrected.gauge" if args.variant == "corrected" else "ahp1.appendixA.gauge"
        run.use(name)
        run.add(f"appendix.unitarity.{args.variant}", ahp1.verify_appendix_unitarity(args.variant))
    elif what == "gauge":
        v = args.variant
        run.use(
            f"ahp1.table1{'-corrected' if v == 'corrected' else ''}.edgemap",
            f"ahp1.table2{'-corrected' if v == 'corrected' else ''}.edgemap",
            "ahp1.appendixA-corrected.gauge" if v == "corrected" else "ahp1.appendixA.gauge",
            "ahp1.alpha.connection",
        )
        run.add(f"gauge.{v}", ahp1.verify_gauge_data(v))
    elif what == "alpha-classes":
        run.use("ahp1.alpha.connection", "ahp1.alpha.fourgraph")
        run.add("alpha.classes", ahp1.verify_alpha_classes())
    elif what == "duality":
        run.use("ahp1.table1-corrected.edgemap")
        run.add("duality", ahp1.verify_duality(), {"expected": scalar_json(ahp1.beta(0).inverse())})
    elif what in ("relations", "lemma", "hom-dims"):
        run.use(
            "ahp1.table1-corrected.edgemap",
            "ahp1.table2-corrected.edgemap",
            "ahp1.appendixA-corrected.gauge",
            "ahp1.alpha.connection",
        )
        m = ahp1.model(w_sign=args.w_sign, alpha_sign=args.alpha_sign, trivalent=args.trivalent)
        if what == "lemma":
            rep = ahp1.verify_lemma(m)
            wit = {r.item: scalar_json(r.value) for r in ahp1.lemma_coefficients(m) if r.value is not None}
            run.add("lemma", rep, wit)
        elif what == "hom-dims":
            run.add("hom-dims", ahp1.verify_hom_dims(not args.no_sigma))
        else:
            for rel, rep in zip(ahp1.relations(), ahp1.verify_relations(m, dims=not args.no_dims)):
                wit = {}
                for p in rel.probes:
                    wit[f"{p.top} | {p.bottom}"] = scalar_json(parse_scalar(p.expected))
                run.add(f"relation.{rel.name}", rep, wit)
    elif what == "bp-compat":
        rep = Report("bp-compat")
        rep.notes.append("skipped: data not transcribed (the AH1-AH4 bimodule lists are not shipped)")
        run.add("bp-compat", rep, skipped=True)
    else:  # pragma: no cover - argparse restricts choices
        raise InputError(f"unknown check {what}")


# ---------------------------------------------------------------------------
# eval


def _diagram_text(ref: str, trivalent: str = "corrected") -> str:
    p = Path(ref)
    if p.exists():
        return p.read_text()
    ahp1 = _ahp1()
    builtin = {
        name: f"scale {pre or ahp1.TRIVALENT[trivalent]}\n{text}" for name, (pre, text) in ahp1.DERIVED.items()
    }
    for k, (lhs, rhs) in ahp1.RELATIONS_TEXT.items():
        builtin[f"relation{k}-lhs"] = lhs
        builtin[f"relation{k}-rhs"] = rhs
    if ref in builtin:
        return builtin[ref]
    raise InputError(f"no diagram file or built-in diagram named {ref!r} (built-ins: {', '.join(sorted(builtin))})")


def cmd_eval(args, run: Run):
    from .intertwiners import BoundaryError, DiagramError, evaluate_coefficient, parse_diagram

    ahp1 = _ahp1()
    m = ahp1.model(w_sign=args.w_sign, alpha_sign=args.alpha_sign, trivalent=args.trivalent)
    try:
        d = parse_diagram(_diagram_text(args.diagram, args.trivalent), m, name=args.diagram)
        ev = evaluate_coefficient(d, args.top, args.bottom, m, side=args.side)
    except BoundaryError as exc:
        raise InputError(f"inconsistent boundary: {exc}") from None
    except DiagramError as exc:
        raise InputError(str(exc)) from None
    rep = Report("eval")
    rep.checked = 1
    rep.notes.append(f"states: {ev.states}")
    if ev.states == 0:
        rep.notes.append("no consistent state: the coefficient is 0")
    wit = {"value": scalar_json(ev.value)}
    if args.expect is not None:
        want = parse_scalar(args.expect)
        wit["expected"] = scalar_json(want)
        if ev.value != want:
            rep.fail(kind="value", got=ev.value.serialize(), expected=want.serialize())
    run.add(f"eval.{args.side}", rep, wit)


# ---------------------------------------------------------------------------
# fusion


def _ring(ref: str):
    from .fusion import FusionRing, build_ah4_ring, group_ring

    if ref.lower() == "ah4":
        return build_ah4_ring()
    if ref.lower().startswith("z") and ref[1:].isdigit():
        return group_ring(int(ref[1:]))
    p = Path(ref)
    if p.exists():
        try:
            return FusionRing.from_json(json.loads(p.read_text()))
        except json.JSONDecodeError as exc:
            raise InputError(f"{ref}: {exc}") from None
    name = ref if ref.endswith(".ring") else f"{ref}.ring"
    if name in catalog():
        return load_asset(name)
    raise InputError(f"unknown ring {ref!r}")


def _fusion_data(ref: str):
    from .fusion import parse_fusion_data

    p = Path(ref)
    if p.exists():
        return parse_fusion_data(p)
    name = ref if ref.endswith(".fusion") else f"{ref}.fusion"
    if name in catalog():
        return load_asset(name)
    raise InputError(f"unknown fusion data {ref!r}")


def cmd_fusion(args, run: Run):
    from . import fusion as F

    if args.action == "check":
        r = _ring(args.target)
        rep = F.check_ring(r)
        dims = F.fp_dims(r)
        rep_d = F.check_fp_dims(r, dims)
        wit = {f"dim({k})": scalar_json(v) if isinstance(v, Scalar) else v.serialize() for k, v in dims.items()}
        run.add(f"ring.{r.name or args.target}", rep)
        run.add(f"ring.{r.name or args.target}.dims", rep_d, wit)
        if r.name == "AH4":
            d = dims["a0x"]
            lhs = (Scalar.coerce(1) + d) / Scalar.coerce(2) * (Scalar.coerce(1) + d)
            rhs = Scalar.coerce(1) + Scalar.coerce(5) * d
            rep_i = Report("dimension identity")
            rep_i.checked = 2
            if d != parse_scalar("4+sqrt17"):
                rep_i.fail(kind="dim(x)", got=d.serialize())
            if lhs != rhs:
                rep_i.fail(kind="((1+d)/2)(1+d) = 1+5d", lhs=lhs.serialize(), rhs=rhs.serialize())
            run.add("ring.AH4.identity", rep_i, {"(1+d)/2*(1+d)": scalar_json(lhs), "1+5d": scalar_json(rhs)})
    elif args.action in ("enumerate", "algebras"):
        r = _ring(args.target)
        mods = F.enumerate_modules(r, args.max_rank, budget=args.budget or None)
        rep = Report("enumerate")
        wit = {}
        for m in mods:
            rep.checked += 1
            if args.action == "algebras":
                objs = F.algebra_objects(m)
                wit[m.name] = [" + ".join(f"{n}*{k}" if n > 1 else k for k, n in o.items()) for o in objs]
            else:
                wit[m.name] = [[list(row) for row in M] for M in m.mats]
        if args.brute:
            ref, covered = F.enumerate_modules_brute(r, args.max_rank)
            rep.checked += 1
            mine = [m.mats for m in mods if m.rank <= covered]
            if mine != [m.mats for m in ref]:
                rep.fail(kind="pruned and brute-force lists differ", covered_rank=covered)
            rep.notes.append(f"brute force agrees up to rank {covered}")
        rep.notes.append(f"{len(mods)} transitive based modules of rank <= {args.max_rank}")
        run.add(f"{args.action}.{r.name or args.target}", rep, wit)
    elif args.action == "compat":
        fd = _fusion_data(args.target)
        try:
            L, M = fd.bimodules[args.left], fd.bimodules[args.right]
        except KeyError as exc:
            raise InputError(f"no bimodule {exc} in {args.target}") from None
        cands = list(fd.bimodules.values())
        res = F.compatibility(L, M, cands, max_entry=args.max_entry, budget=args.budget or None)
        rep = Report("compat")
        rep.checked = len(cands)
        names = [N.name for N, _ in res]
        rep.notes.append(f"{L.name} . {M.name} = {{{', '.join(names)}}}")
        if args.expect is not None:
            want = sorted(s.strip() for s in args.expect.split(",") if s.strip())
            if sorted(names) != want:
                rep.fail(kind="compatibility set", got=names, expected=want)
        run.add(f"compat.{L.name}.{M.name}", rep, {"result": names})


# ---------------------------------------------------------------------------
# fp-weights


def cmd_fp_weights(args, run: Run):
    from .graphs import BipartiteGraph, fp_weights

    name = args.graph if args.graph.endswith(".graph") else f"{args.graph}.graph"
    if name not in catalog():
        raise InputError(f"unknown graph {args.graph!r}")
    run.use(name)
    g: BipartiteGraph = load_asset(name)
    from .assets import load_json

    norm = args.norm_sq or load_json(name).get("selftest", {}).get("norm_sq")
    if norm is None:
        raise InputError("no --norm-sq given and the graph records none")
    base = args.base or g.even[0]
    w = fp_weights(g, parse_scalar(norm), base)
    rep = Report("fp-weights")
    rep.checked = len(g.even) + len(g.odd)
    run.add(f"fp-weights.{args.graph}", rep, {v: scalar_json(w[v]) for v in list(g.even) + list(g.odd)})


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ahplus", description="Exact checks for the AH+1 connections and AH+2 relations.")
    p.add_argument("--report", metavar="PATH", help="write a JSON report")
    p.add_argument("--precision", type=int, default=64, help="starting digits of sign intervals")
    p.add_argument("--budget", type=float, default=0, help="wall-clock limit in seconds (0: none)")
    sub = p.add_subparsers(dest="command", required=True)

    def conventions(sp):
        sp.add_argument("--w-sign", type=int, choices=(1, -1), default=-1, help="sign applied to the printed gauge matrices")
        sp.add_argument("--alpha-sign", type=int, choices=(1, -1), default=1, help="sign of the alpha cap relative to +1 at g~")
        sp.add_argument("--trivalent", choices=("corrected", "printed"), default="corrected")

    v = sub.add_parser("verify", help="run a named verification")
    v.add_argument(
        "what",
        choices=(
            "kappa",
            "alpha-classes",
            "gauge",
            "appendix-unitarity",
            "duality",
            "relations",
            "lemma",
            "hom-dims",
            "bp-compat",
        ),
    )
    v.add_argument("--variant", choices=("corrected", "printed"), default="corrected")
    v.add_argument("--no-dims", action="store_true", help="skip hom-space dimensions in relations")
    v.add_argument("--no-sigma", action="store_true", help="skip dim(sigma, sigma^2) in hom-dims")
    conventions(v)

    e = sub.add_parser("eval", help="evaluate one diagram coefficient")
    e.add_argument("diagram", help="diagram file, or a built-in name such as U or relation2-lhs")
    e.add_argument("top")
    e.add_argument("bottom")
    e.add_argument("--side", choices=("left", "right"), default="left")
    e.add_argument("--expect", help="expected value as a scalar expression")
    conventions(e)

    f = sub.add_parser("fusion", help="fusion ring and module tools")
    f.add_argument("action", choices=("check", "enumerate", "compat", "algebras"))
    f.add_argument("target", help="ring (ah4, z<n>, asset or JSON file), or fusion data for compat")
    f.add_argument("left", nargs="?", help="compat: first bimodule")
    f.add_argument("right", nargs="?", help="compat: second bimodule")
    f.add_argument("--max-rank", type=int, default=3)
    f.add_argument("--max-entry", type=int, default=3)
    f.add_argument("--brute", action="store_true", help="also run the brute-force reference")
    f.add_argument("--expect", help="compat: expected comma-separated result set")

    w = sub.add_parser("fp-weights", help="Perron-Frobenius weights of a shipped graph")
    w.add_argument("graph")
    w.add_argument("--norm-sq")
    w.add_argument("--base")
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    set_precision(args.precision)
    words = list(argv if argv is not None else sys.argv[1:])
    if "--report" in words:
        k = words.index("--report")
        del words[k : k + 2]
    label = " ".join(w for w in words if not w.startswith("--report="))
    run = Run(label)
    start = time.monotonic()
    code = EXIT_OK
    handlers = {"verify": cmd_verify, "eval": cmd_eval, "fusion": cmd_fusion, "fp-weights": cmd_fp_weights}
    from .fusion import FusionError, SearchBudgetExceeded

    try:
        with _budget(args.budget):
            if args.command == "fusion" and args.action == "compat" and not (args.left and args.right):
                raise InputError("compat needs two bimodule names")
            handlers[args.command](args, run)
        code = run.exit_code()
    except (BudgetExceeded, SearchBudgetExceeded) as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        code = EXIT_BUDGET
    except (InputError, AssetError, ExprSyntaxError, ScalarError, FusionError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        code = EXIT_INPUT
    _print(run, out)
    if args.report:
        doc = run.to_json(time.monotonic() - start)
        doc["exit_code"] = code
        Path(args.report).write_text(json.dumps(doc, indent=1, default=str) + "\n")
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
