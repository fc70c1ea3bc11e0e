"""gptbell: incompatibility measures and Bell bounds for polytopic state spaces.

Exit codes: 0 success, 2 validation error, 3 enumeration cap exceeded.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import re
import sys

import numpy as np

from . import bell, gpt, spaces, tensor
from .errors import CapExceeded, GptError, ValidationError
from .output import to_csv, to_json, to_text

log = logging.getLogger("gptbell")

EXIT_OK, EXIT_VALIDATION, EXIT_CAP = 0, 2, 3


# -- selectors ---------------------------------------------------------------

def resolve_space(selector, model=None) -> gpt.StateSpace:
    if selector in (None, "model"):
        if model is None:
            raise ValidationError("no space selector given (use SPACE or --model PATH)")
        return spaces.read_model(model)
    return spaces.parse_selector(selector)


_EFFECT_RE = re.compile(r"^e(\d+)(c?)$")


def effect_label(space: gpt.StateSpace, v) -> str:
    effs = space.nontrivial_effects()
    k = space.catalog_index(v, effs)
    if k is not None:
        return f"e{k + 1}"
    k = space.catalog_index(space.order_unit - np.asarray(v), effs)
    if k is not None:
        return f"e{k + 1}c"
    return "[" + ",".join(f"{x:.6g}" for x in v) + "]"


def parse_effect(space: gpt.StateSpace, text: str, tol: float) -> gpt.Effect:
    """``eK`` (K-th nontrivial catalog effect, 1-based), ``eKc`` or a vector literal."""
    m = _EFFECT_RE.match(text)
    if m:
        effs = space.nontrivial_effects()
        k = int(m.group(1))
        if not 1 <= k <= len(effs):
            raise ValidationError(f"{text}: {space.name} has {len(effs)} nontrivial catalog effects")
        e = gpt.Effect(effs[k - 1], space)
        return gpt.complement(e) if m.group(2) else e
    try:
        vec = [float(x) for x in text.strip("[]() ").split(",")]
    except ValueError as exc:
        raise ValidationError(f"bad effect selector {text!r}") from exc
    return gpt.make_effect(space, vec, tol)


def parse_range(text: str) -> list:
    """``N``, ``A..B`` or ``A..B:STEP``."""
    m = re.fullmatch(r"(\d+)(?:\.\.(\d+)(?::(\d+))?)?", text)
    if not m:
        raise ValidationError(f"bad range {text!r}; use N, A..B or A..B:STEP")
    a = int(m.group(1))
    b = int(m.group(2)) if m.group(2) else a
    step = int(m.group(3)) if m.group(3) else 1
    if b < a or step < 1:
        raise ValidationError(f"empty range {text!r}")
    return list(range(a, b + 1, step))


# -- commands -----------------------------------------------------------------

def cmd_report(args) -> dict:
    space = resolve_space(args.space, args.model)
    effs = space.nontrivial_effects()
    lo = gpt.lambda_opt(space)
    summary = [
        ("space", space.name),
        ("vertices", len(space.vertices)),
        ("nontrivial extreme effects", len(effs)),
        ("lambda_opt", lo.value),
    ]
    if lo.pair is not None:
        e, f = lo.effects
        lb, p, q, _ = gpt.lambda_bar_ef(e, f)
        t, _ = gpt.t_ef(e, f)
        summary += [
            ("argmin pair", f"e{lo.pair[0] + 1}, e{lo.pair[1] + 1}"),
            ("t at argmin", t),
            ("lambda_bar at argmin", lb),
            ("bias p", p),
            ("bias q", q),
        ]
    summary.append(("bound 2/lambda_opt", 2.0 / lo.value))
    notes, table, columns = [], [], []
    if args.audit:
        ok, ext, sampled = gpt.audit_lambda_opt(space, args.audit, seed=args.seed)
        summary += [("audit samples", args.audit), ("audit sampled min", sampled), ("audit passed", ok)]
    if space.name.startswith("polygon:"):
        n = len(space.vertices)
        columns = ["separation", "pair", "lambda", "t", "lambda_bar", "p", "q"]
        for k in range(1, n // 2 + 1):
            e, f = gpt.Effect(effs[0], space), gpt.Effect(effs[k], space)
            lam, _ = gpt.lambda_ef(e, f)
            t, _ = gpt.t_ef(e, f)
            lb, p, q, _ = gpt.lambda_bar_ef(e, f)
            table.append({"separation": k, "pair": f"e1,e{k + 1}", "lambda": lam, "t": t,
                          "lambda_bar": lb, "p": p, "q": q})
    return {"command": "report", "space": space.name, "summary": summary,
            "notes": notes, "table": table, "columns": columns}


def cmd_lambda(args) -> dict:
    space = resolve_space(args.space, args.model)
    e = parse_effect(space, args.e, args.tol)
    f = parse_effect(space, args.f, args.tol)
    lam, g = gpt.lambda_ef(e, f)
    t, _ = gpt.t_ef(e, f)
    dual = gpt.dual_program(e, f)[0]
    relation = (1.0 - lam) / (2.0 * lam)
    summary = [
        ("e", effect_label(space, e.functional)),
        ("f", effect_label(space, f.functional)),
        ("lambda", lam),
        ("t", t),
        ("dual value", dual),
        ("(1-lambda)/(2 lambda)", relation),
        ("duality check", abs(dual - t) <= 1e-6),
        ("relation check", abs(relation - t) <= 1e-6),
        ("witness g", [float(x) for x in g]),
    ]
    if args.biased:
        lb, p, q, gb = gpt.lambda_bar_ef(e, f)
        summary += [("lambda_bar", lb), ("bias p", p), ("bias q", q)]
    return {"command": "lambda", "space": space.name, "summary": summary}


def _me_state(space: gpt.StateSpace):
    if space.name == "squit":
        return tensor.pr_box()
    if space.name.startswith("polygon:"):
        return tensor.maximally_entangled(len(space.vertices))
    raise ValidationError(f"no maximally entangled state defined for {space.name}")


def cmd_bell(args) -> dict:
    sa = resolve_space(args.space_a, args.model)
    sb = resolve_space(args.space_b, args.model)
    summary = [("space A", sa.name), ("space B", sb.name), ("cone", args.cone)]
    notes = []
    bound = bell.incompat_bound(sa)
    if args.construct:
        if sa.name != sb.name:
            raise ValidationError("--construct needs identical spaces on both sides")
        e = parse_effect(sa, args.construct[0], args.tol)
        f = parse_effect(sa, args.construct[1], args.tol)
        res = bell.saturation_construction(sa, e, f, restarts=args.restarts, seed=args.seed)
        summary += [
            ("e", effect_label(sa, e.functional)),
            ("f", effect_label(sa, f.functional)),
            ("achieved", res.achieved),
            ("2/lambda_ef", res.bound),
            ("2(2t+1)", res.theorem_value),
            ("t", res.t),
            ("dual value", res.dual_value),
            ("saturated", abs(res.achieved - res.bound) <= max(args.tol, 1e-6)),
            ("heuristic", res.heuristic),
        ]
        return {"command": "bell", "space": f"{sa.name} x {sb.name}", "summary": summary, "notes": notes}
    if args.state in ("me", "pr"):
        if sa.name != sb.name:
            raise ValidationError("--state me needs identical spaces on both sides")
        state = _me_state(sa)
        value, _ = bell.best_state_setting(state)
        exp_ray = bell.expectation_b(state, gpt.DichotomicObservable(gpt.complement(gpt.Effect(sb.dual_rays[0], state.space_b))))
        lb = gpt.lambda_bar_opt(sa)[0]
        summary += [
            ("state", "maximally entangled"),
            ("bell value", value),
            ("<B1> for B1 = u - 2 e_ray", exp_ray),
            ("lambda_bar_opt", lb),
            ("biased bound", bell.biased_bound(lb, exp_ray)),
            ("bound 2/lambda_opt", bound),
        ]
        notes.append(f"bell value {value:.6f} <= {bound:.6f}")
    else:
        rep = bell.tsirelson_bound(sa, sb, args.cone, symmetry=args.symmetry, jobs=args.jobs)
        summary += [
            ("tsirelson", rep.tsirelson),
            ("bound 2/lambda_opt", rep.bound_unbiased),
            ("saturates bound", abs(rep.tsirelson - rep.bound_unbiased) <= max(args.tol, 1e-6)),
            ("LPs solved", rep.lp_count),
            ("argmax effects", ", ".join(
                effect_label(s.space, s.plus.functional)
                for s in (rep.argmax_setting.a1, rep.argmax_setting.a2, rep.argmax_setting.b1, rep.argmax_setting.b2)
            )),
        ]
        notes.append(f"tsirelson {rep.tsirelson:.6f} <= {rep.bound_unbiased:.6f}")
    return {"command": "bell", "space": f"{sa.name} x {sb.name}", "summary": summary, "notes": notes}


SWEEP_COLUMNS = {
    "lambda": ["n", "lambda_opt", "bound"],
    "all": ["n", "lambda_opt", "bound", "me_bell", "tsirelson", "saturated"],
}


def cmd_sweep(args) -> dict:
    ns = parse_range(args.range)
    if args.parity != "all":
        ns = [n for n in ns if n % 2 == (0 if args.parity == "even" else 1)]
    if any(n < 3 for n in ns):
        raise ValidationError("polygon sweep needs n >= 3")
    rows = []
    for n in ns:
        space = spaces.polygon(n)
        lam = gpt.lambda_opt(space, full_table=False).value
        row = {"n": n, "lambda_opt": lam, "bound": 2.0 / lam}
        if args.quantity == "all":
            me, _ = bell.best_state_setting(tensor.maximally_entangled(n))
            rep = bell.tsirelson_bound(space, space, "max", symmetry=args.symmetry, jobs=args.jobs)
            row.update(me_bell=me, tsirelson=rep.tsirelson,
                       saturated=abs(rep.tsirelson - 2.0 / lam) <= 1e-6)
        log.info("n=%d done", n)
        rows.append(row)
    return {"command": "sweep", "space": f"polygon {args.range}", "summary": [],
            "table": rows, "columns": SWEEP_COLUMNS[args.quantity]}


def cmd_export(args) -> dict:
    space = resolve_space(args.space, args.model)
    return {"command": "export", "space": space.name, "model": spaces.to_spec(space).to_dict()}


# -- rendering ------------------------------------------------------------------

def render(doc: dict, fmt: str) -> str:
    if doc["command"] == "export":
        return json.dumps(doc["model"], indent=2) + "\n"
    if fmt == "json":
        out = {"command": doc["command"], "space": doc["space"],
               "results": {k: v for k, v in doc.get("summary", [])}}
        if doc.get("table"):
            out["table"] = doc["table"]
        if doc.get("notes"):
            out["notes"] = doc["notes"]
        return to_json(out)
    if fmt == "csv":
        if doc.get("table"):
            return to_csv(doc["table"], doc["columns"])
        rows = [{"key": k, "value": v if not isinstance(v, list) else " ".join(repr(float(x)) for x in v)}
                for k, v in doc.get("summary", [])]
        return to_csv(rows, ["key", "value"])
    return to_text(doc)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=1e-9, help="effect validation / comparison tolerance")
    common.add_argument("--format", choices=["text", "json", "csv"], default=None)
    common.add_argument("--out", help="write output to this path instead of stdout")
    common.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    common.add_argument("--model", help="ModelSpec JSON file used when SPACE is omitted or 'model'")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="gptbell", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("report", parents=[common], help="incompatibility summary for one space")
    r.add_argument("space", nargs="?")
    r.add_argument("--audit", type=int, default=0, metavar="N", help="random interior-pair audit with N samples")
    r.set_defaults(func=cmd_report)

    lam = sub.add_parser("lambda", parents=[common], help="incompatibility programs for one pair")
    lam.add_argument("space")
    lam.add_argument("e")
    lam.add_argument("f")
    lam.add_argument("--biased", action="store_true")
    lam.set_defaults(func=cmd_lambda)

    b = sub.add_parser("bell", parents=[common], help="Bell values and Tsirelson bounds")
    b.add_argument("space_a")
    b.add_argument("space_b")
    b.add_argument("--cone", choices=["min", "max"], default="max")
    b.add_argument("--state", choices=["opt", "me", "pr"], default="opt")
    b.add_argument("--construct", nargs=2, metavar=("E", "F"))
    b.add_argument("--symmetry", action="store_true", help="fix A1, B1 to symmetry-orbit representatives")
    b.add_argument("--restarts", type=int, default=20)
    b.set_defaults(func=cmd_bell)

    s = sub.add_parser("sweep", parents=[common], help="polygon sweep as CSV")
    s.add_argument("range", help="N, A..B or A..B:STEP")
    s.add_argument("--quantity", choices=["lambda", "all"], default="lambda")
    s.add_argument("--parity", choices=["all", "even", "odd"], default="all")
    s.add_argument("--symmetry", action="store_true")
    s.set_defaults(func=cmd_sweep)

    x = sub.add_parser("export", parents=[common], help="write a space as a ModelSpec JSON document")
    x.add_argument("space", nargs="?")
    x.set_defaults(func=cmd_export)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if args.tol <= 0:
        print("error: --tol must be positive", file=sys.stderr)
        return EXIT_VALIDATION
    fmt = args.format or ("csv" if args.command == "sweep" else "text")
    try:
        doc = args.func(args)
    except CapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (ValidationError, GptError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    text = render(doc, fmt)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
