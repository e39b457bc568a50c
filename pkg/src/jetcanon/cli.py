"""Command-line front end.

Exit codes: 0 success, 1 verdict false, 2 input error, 3 internal limit.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import canon, evosys
from .errors import JetError, NonCanonicalError, OrderLimitError
from .jetspace import DEFAULT_ORDER_LIMIT, euler_lagrange, is_total_divergence
from .manifest import Manifest, load_manifest
from .poisson import bracket_density
from .pullback import Prolongation, transform_functional
from .symexpr import render

EXIT_OK, EXIT_FALSE, EXIT_INPUT, EXIT_LIMIT = 0, 1, 2, 3

COMMANDS = ("check-canonical", "transform", "verify-claws", "el", "bracket", "pullback", "is-divergence")


class InputError(JetError):
    pass


def _resolve(m: Manifest, text: str | None, default: str | None = None):
    """An expression given as text, or by the name of the Hamiltonian or a claw."""
    text = text if text is not None else default
    if text is None:
        raise InputError("an expression is required (use --expr)")
    if text == m.hamiltonian_name:
        return m.hamiltonian
    if text in m.claws:
        return m.claws[text]
    return m.bundle.parse(text)


def _require_transform(m: Manifest):
    if m.transform is None:
        raise InputError("this command needs a [transform] section")
    return m.transform


def _options(m: Manifest, args):
    case = args.case or m.options.get("case", "auto")
    samples = args.samples if args.samples is not None else m.options.get("samples", 50)
    seed = args.seed if args.seed is not None else m.options.get("seed", 0)
    return case, samples, seed


def _conditions(report):
    return [{"label": c.label, "residual": render(c.residual), "satisfied": c.satisfied}
            for c in report.conditions]


def _vector(m: Manifest, values):
    return [{"field": f, "value": render(v)} for f, v in zip(m.bundle.fiber, values)]


# ---------------------------------------------------------------------------
# commands: each returns (report dict, exit code)

def cmd_check_canonical(m, args):
    psi = _require_transform(m)
    case, samples, seed = _options(m, args)
    prol = Prolongation(psi)
    report = canon.check_canonical(psi, m.operator, case, prol)
    out = {"command": "check-canonical", "manifest": m.path, "case": report.case,
           "verdict": report.verdict, "orientation": report.orientation,
           "conditions": _conditions(report)}
    code = EXIT_OK if report.verdict else EXIT_FALSE
    if samples > 0:
        cv = canon.cross_validate(psi, m.operator, samples, seed, prol=prol)
        ce = None
        if cv.counterexample:
            ce = {"P": render(cv.counterexample[0]), "Q": render(cv.counterexample[1])}
        out["cross_validation"] = {"samples": cv.samples, "preserved": cv.preserved,
                                   "seed": seed, "counterexample": ce}
        if report.verdict and not cv.all_preserved:
            out["error"] = "canonical verdict contradicted by sampling"
            code = EXIT_LIMIT
    return out, code


def _mismatches(m, new_h, new_rhs, new_claws):
    exp = m.expected
    found = []
    if exp.get("hamiltonian") is not None:
        found.append(evosys.compare_printed("hamiltonian", new_h, exp["hamiltonian"], m.bundle))
    for f, v in zip(m.bundle.fiber, new_rhs):
        if f in exp.get("rhs", {}):
            found.append(evosys.compare_printed(f"rhs {f}", v, exp["rhs"][f], m.bundle))
    for name, v in new_claws.items():
        if name in exp.get("claws", {}):
            found.append(evosys.compare_printed(f"claw {name}", v, exp["claws"][name], m.bundle))
    return [e for e in found if e is not None]


def cmd_transform(m, args):
    psi = _require_transform(m)
    case, _, _ = _options(m, args)
    result = evosys.transform_system(m.system(), psi, allow_noncanonical=args.allow_noncanonical,
                                     case=case)
    new = result.system
    claws = [{"name": n, "density": render(P), "conserved": evosys.verify_conservation_law(P, new)}
             for n, P in new.claws.items()]
    out = {"command": "transform", "manifest": m.path, "case": result.report.case,
           "verdict": result.report.verdict, "orientation": result.report.orientation,
           "conditions": _conditions(result.report),
           "hamiltonian'": render(new.hamiltonian),
           "rhs'": _vector(m, result.rhs),
           "claws'": claws,
           "paper_mismatch": _mismatches(m, new.hamiltonian, result.rhs, new.claws)}
    return out, EXIT_OK


def cmd_verify_claws(m, args):
    sys_ = m.system()
    rows = []
    for name, P in m.claws.items():
        residual = evosys.conservation_residual(P, sys_)
        witness = euler_lagrange(residual, m.bundle)
        rows.append({"name": name, "conserved": all(w.is_zero for w in witness),
                     "witness": [render(w) for w in witness]})
    ok = all(r["conserved"] for r in rows)
    out = {"command": "verify-claws", "manifest": m.path,
           "rhs": _vector(m, evosys.rhs(sys_)), "claws": rows, "verdict": ok}
    return out, EXIT_OK if ok else EXIT_FALSE


def cmd_el(m, args):
    e = _resolve(m, args.expr, m.hamiltonian_name)
    out = {"command": "el", "manifest": m.path, "expr": render(e),
           "components": _vector(m, euler_lagrange(e, m.bundle))}
    return out, EXIT_OK


def cmd_bracket(m, args):
    default_p = next(iter(m.claws), m.hamiltonian_name)
    P = _resolve(m, args.p, default_p)
    Q = _resolve(m, args.q, m.hamiltonian_name)
    res = bracket_density(P, Q, m.operator)
    out = {"command": "bracket", "manifest": m.path, "P": render(P), "Q": render(Q),
           "density": render(res.density), "witness": [render(w) for w in res.witness],
           "divergence": res.is_divergence}
    return out, EXIT_OK


def cmd_pullback(m, args):
    psi = _require_transform(m)
    F = _resolve(m, args.expr, m.hamiltonian_name)
    prol = Prolongation(psi)
    out = {"command": "pullback", "manifest": m.path, "expr": render(F),
           "pullback": render(prol.pullback(F)),
           "density": render(transform_functional(F, prol)),
           "det": render(prol.det)}
    return out, EXIT_OK


def cmd_is_divergence(m, args):
    e = _resolve(m, args.expr, m.hamiltonian_name)
    ok = is_total_divergence(e, m.bundle)
    out = {"command": "is-divergence", "manifest": m.path, "expr": render(e), "divergence": ok}
    return out, EXIT_OK if ok else EXIT_FALSE


HANDLERS = {
    "check-canonical": cmd_check_canonical,
    "transform": cmd_transform,
    "verify-claws": cmd_verify_claws,
    "el": cmd_el,
    "bracket": cmd_bracket,
    "pullback": cmd_pullback,
    "is-divergence": cmd_is_divergence,
}


# ---------------------------------------------------------------------------
# text rendering

def _text_conditions(out, lines):
    lines.append(f"case: {out['case']}")
    for c in out["conditions"]:
        lines.append(f"  {c['label']}: {c['residual']}  [{'ok' if c['satisfied'] else 'FAIL'}]")
    lines.append(f"orientation: {out['orientation']}")


def to_text(out: dict) -> str:
    cmd = out["command"]
    lines = []
    if cmd == "check-canonical":
        _text_conditions(out, lines)
        cv = out.get("cross_validation")
        if cv:
            lines.append(f"cross-validation: {cv['preserved']}/{cv['samples']} preserved (seed {cv['seed']})")
            if cv["counterexample"]:
                lines.append(f"  counterexample P = {cv['counterexample']['P']}")
                lines.append(f"  counterexample Q = {cv['counterexample']['Q']}")
        lines.append(f"verdict: {'CANONICAL' if out['verdict'] else 'NOT CANONICAL'}")
        if "error" in out:
            lines.append(f"error: {out['error']}")
    elif cmd == "transform":
        _text_conditions(out, lines)
        lines.append(f"verdict: {'CANONICAL' if out['verdict'] else 'NOT CANONICAL'}")
        lines.append("hamiltonian': " + out["hamiltonian'"])
        for r in out["rhs'"]:
            lines.append(f"{r['field']}_t = {r['value']}")
        for c in out["claws'"]:
            lines.append(f"claw {c['name']}': {c['density']}  [{'conserved' if c['conserved'] else 'NOT conserved'}]")
        lines.append(f"paper_mismatch: {len(out['paper_mismatch'])}")
        for e in out["paper_mismatch"]:
            lines.append(f"  {e['item']}: {e['relation']}")
            lines.append(f"    computed: {e['computed']}")
            lines.append(f"    printed:  {e['printed']}")
            if "reason" in e:
                lines.append(f"    reason:   {e['reason']}")
            for t in e.get("terms", ()):
                lines.append(f"    {t['monomial']}: computed {t['computed']}, printed {t['printed']}")
    elif cmd == "verify-claws":
        for r in out["rhs"]:
            lines.append(f"{r['field']}_t = {r['value']}")
        for c in out["claws"]:
            status = "conserved" if c["conserved"] else "NOT conserved"
            lines.append(f"{c['name']}: {status}")
            if not c["conserved"]:
                lines.append(f"  witness: [{', '.join(c['witness'])}]")
    elif cmd == "el":
        comps = out["components"]
        if len(comps) == 1:
            lines.append(comps[0]["value"])
        else:
            lines.extend(f"E_{c['field']} = {c['value']}" for c in comps)
    elif cmd == "bracket":
        lines.append(f"density: {out['density']}")
        lines.append(f"witness: [{', '.join(out['witness'])}]")
        lines.append(f"divergence: {'true' if out['divergence'] else 'false'}")
    elif cmd == "pullback":
        lines.append(f"pullback: {out['pullback']}")
        lines.append(f"density: {out['density']}")
    elif cmd == "is-divergence":
        lines.append("true" if out["divergence"] else "false")
    return "\n".join(lines) + "\n"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jetcanon", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("manifest")
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--case", choices=("auto", "1", "2", "3"))
    common.add_argument("--samples", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--allow-noncanonical", action="store_true")
    common.add_argument("--max-order", type=int, default=DEFAULT_ORDER_LIMIT)
    common.add_argument("--expr")
    common.add_argument("--p")
    common.add_argument("--q")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


_EXPR_FLAGS = ("--expr", "--p", "--q")


def _join_values(argv):
    # expressions may start with '-', which argparse would take for an option
    out, i = [], 0
    while i < len(argv):
        if argv[i] in _EXPR_FLAGS and i + 1 < len(argv):
            out.append(f"{argv[i]}={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(_join_values(sys.argv[1:] if argv is None else list(argv)))
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s", stream=stderr)
    try:
        m = load_manifest(args.manifest, order_limit=args.max_order)
        out, code = HANDLERS[args.command](m, args)
    except OrderLimitError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_LIMIT
    except NonCanonicalError as exc:
        print(f"error: {exc} (use --allow-noncanonical to override)", file=stderr)
        return EXIT_FALSE
    except (JetError, OSError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_INPUT
    if args.format == "json":
        stdout.write(json.dumps(out, indent=2) + "\n")
    else:
        stdout.write(to_text(out))
    return code


if __name__ == "__main__":
    sys.exit(main())
