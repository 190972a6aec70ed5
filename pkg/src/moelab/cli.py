"""Command-line front end.

Every command writes one JSON report (stdout or ``--out``) and a one-line
summary on stderr.  Exit codes: 0 PASS/ACCEPT, 1 FAIL/REJECT, 2 usage or
spec syntax error, 3 budget or resource error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass

import numpy as np

from . import __version__
from .certify import ACCEPT, certify_free_product, certify_main_theorem
from .channels import (
    DensityState,
    complementary_output,
    composed_entropy_formula,
    compose_left_right,
    l2_deviation_check,
    minimize_output_entropy,
    random_state,
    von_neumann_entropy,
    window,
)
from .combinatorics import (
    ball2_involutions,
    girth_report,
    group_rank,
    is_minimal_generating_set,
    pair_multiplicity,
)
from .groups import BudgetError, FreeProduct, GroupError, ball, format_bigint, get_budget
from .harmonic import (
    AlgebraElement,
    InequalityViolation,
    b2_constant,
    operator_norm,
    uniform,
    upper_bounds,
    verify_freeprod_inequality,
    verify_power_inequality,
    verify_product_inequality,
)
from .parse import SpecSyntaxError, parse_spec

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3


@dataclass
class RunConfig:
    command: str
    spec: str | None
    radius: int = 3
    power: int = 1
    trials: int = 200
    seed: int = 0
    tol: float = 1e-9
    precision_bits: int = 256
    budget: int = 4096
    out: str | None = None


class UsageError(Exception):
    pass


def _spec(text: str | None, flag: str = "--G"):
    if text is None:
        raise UsageError(f"{flag} is required")
    return parse_spec(text)


def _config(args) -> RunConfig:
    spec = getattr(args, "G", None)
    return RunConfig(
        command=" ".join(x for x in (args.command, getattr(args, "sub", None)) if x),
        spec=str(parse_spec(spec)) if spec else None,
        radius=args.radius,
        power=args.power,
        trials=args.trials,
        seed=args.seed,
        tol=args.tol,
        precision_bits=args.precision_bits,
        budget=get_budget(args.budget),
        out=args.out,
    )


# ---------------------------------------------------------------------------
# commands: each returns (report dict, status string or None)


def cmd_group_info(args):
    G = _spec(args.G)
    budget = args.budget
    report = {
        "canonical": str(G),
        "order": None if G.order is None else format_bigint(G.order),
        "finite": G.order is not None,
        "generator_count": format_bigint(int(G.generator_count)),
    }
    try:
        report["ball_sizes"] = [len(ball(G, m, budget)) for m in range(args.radius + 1)]
        report["generators"] = [G.format(s) for s in G.generators]
    except BudgetError as exc:
        report["ball_sizes"] = None
        report["note"] = str(exc)
    return report, None


def cmd_constants(args):
    G = _spec(args.G)
    budget = args.budget
    pm = pair_multiplicity(G, budget)
    gr = girth_report(G, budget=budget)
    report = {
        "group": str(G),
        "pair_multiplicity": pm.to_dict(),
        "girth": gr.to_dict(),
    }
    try:
        report["rank"] = group_rank(G, budget)
        report["minimal_generating_set"] = is_minimal_generating_set(G, budget)
    except (BudgetError, GroupError) as exc:
        report["rank"] = None
        report["minimal_generating_set"] = None
        report["rank_note"] = str(exc)
    try:
        report["ball2_involutions"] = [G.format(x) for x in ball2_involutions(G, budget)]
    except BudgetError as exc:
        report["ball2_involutions"] = None
        report["involution_note"] = str(exc)
    return report, None


def _parse_function(G, text: str | None, budget) -> AlgebraElement:
    """``"uniform"`` (unit uniform on the radius-2 ball) or ``"c:x + c:y"``."""
    if text is None or text == "uniform":
        return uniform(G, ball(G, 2, budget), normalized=True)
    coeffs = {}
    for term in text.split("+"):
        term = term.strip()
        c, _, x = term.rpartition(":") if ":" in term else ("1", ":", term)
        g = G.parse_element(x.strip())
        coeffs[g] = coeffs.get(g, 0) + complex(c)
    return AlgebraElement(G, coeffs)


def cmd_norm(args):
    G = _spec(args.G)
    f = _parse_function(G, args.f, args.budget)
    nb = operator_norm(G, f, R=args.radius, budget=args.budget)
    report = {
        "group": str(G),
        "function_l2": f.norm2(),
        "norm": nb.to_dict(),
        "registered_upper_bounds": upper_bounds(G, f, args.budget),
    }
    ok = nb.lower <= nb.upper * (1 + args.tol)
    return report, "PASS" if ok else "FAIL"


def _default_p(G, budget) -> float:
    c, r, _ = b2_constant(G, budget)
    return c * math.sqrt(r)


def cmd_verify(args):
    budget = args.budget
    try:
        if args.sub == "srd":
            G = _spec(args.G)
            H = _spec(args.H, "--H")
            p = args.p if args.p is not None else _default_p(G, budget)
            q = args.q if args.q is not None else _default_p(H, budget)
            rep = verify_product_inequality(
                G, H, ball(G, 2, budget), ball(H, 2, budget), p, q,
                trials=args.trials, seed=args.seed, R=args.radius, budget=budget,
            )
        elif args.sub == "power":
            G = _spec(args.G)
            p = args.p if args.p is not None else _default_p(G, budget)
            rep = verify_power_inequality(
                G, args.n, args.m, p, trials=args.trials, seed=args.seed, R=args.radius, budget=budget
            )
        else:
            G = _spec(args.G)
            if not isinstance(G, FreeProduct):
                raise UsageError(f"verify freeprod needs a free product, got {G}")
            if G.factor_count > 64:
                raise BudgetError(f"free factors of {G}", G.factor_count, 64)
            factors = [G.factor(i) for i in range(G.factor_count)]
            rep = verify_freeprod_inequality(factors, R=args.radius, trials=args.trials, seed=args.seed, budget=budget)
    except InequalityViolation as exc:
        rep = exc.args[0]
    return rep.to_dict(), "PASS" if rep.passed else "FAIL"


def cmd_channel_entropy(args):
    G = _spec(args.G)
    budget = args.budget
    n = len(G.generators)
    if args.input == "delta_e":
        rho = DensityState.delta(G, power=1 if args.composed else args.power)
    else:
        basis = window(G, args.radius, budget)
        rho = random_state(basis, np.random.default_rng(args.seed), 1 if args.composed else args.power)
    report = {"group": str(G), "input": args.input, "units": "nats"}
    if args.composed:
        out = compose_left_right(G, rho)
        report["channel"] = "left-after-right"
        report["entropy"] = von_neumann_entropy(out)
        report["output_dimension"] = out.dim
        if args.input == "delta_e":
            report["formula_2lnN_minus_lnN_over_N"] = composed_entropy_formula(n)
    else:
        out = complementary_output(G, rho, args.power, budget)
        report["channel"] = "left-complementary"
        report["power"] = args.power
        report["entropy"] = von_neumann_entropy(out)
        report["max_entropy"] = args.power * math.log(n)
    status = None
    if args.q is not None:
        pm = pair_multiplicity(G, budget).value
        basis = window(G, args.radius, budget)
        rng = np.random.default_rng(args.seed)
        checks = [
            l2_deviation_check(G, args.q, pm, args.power, random_state(basis, rng, args.power))
            for _ in range(args.trials)
        ]
        worst = min(checks, key=lambda c: c.margin)
        report["deviation_checks"] = {
            "q": args.q,
            "pair_multiplicity": pm,
            "trials": args.trials,
            "worst": worst.to_dict(),
            "failures": sum(not c.passed for c in checks),
        }
        status = "PASS" if all(c.passed for c in checks) else "FAIL"
    return report, status


def cmd_moe(args):
    G = _spec(args.G)
    res = minimize_output_entropy(
        G, R=args.radius, k=args.power, restarts=args.restarts, seed=args.seed, tol=args.tol, budget=args.budget
    )
    report = res.to_dict()
    n = len(G.generators)
    report["max_entropy"] = args.power * math.log(n)
    ok = -args.tol <= res.best_value <= report["max_entropy"] + args.tol
    return report, "PASS" if ok else "FAIL"


def cmd_certify(args):
    prec = args.precision_bits
    if args.sub == "main":
        G = _spec(args.G)
        cert = certify_main_theorem(G, args.q, prec=prec, budget=args.budget)
    else:
        if args.factors is None:
            raise UsageError("--factors is required")
        F = parse_spec(args.factors)
        copies = _bigint(args.copies)
        if isinstance(F, FreeProduct):
            factors = [(spec, mult * copies) for spec, mult in F.factors]
        else:
            factors = [(F, copies)]
        cert = certify_free_product(args.M, factors, prec=prec, budget=args.budget)
    return cert.to_dict(), "PASS" if cert.verdict == ACCEPT else "FAIL"


def _bigint(text: str) -> int:
    text = text.replace(" ", "")
    base, _, exp = text.partition("^")
    try:
        return int(base) ** int(exp) if exp else int(base)
    except ValueError:
        raise UsageError(f"cannot read integer {text!r}") from None


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--radius", type=int, default=3)
    common.add_argument("--power", type=int, default=1)
    common.add_argument("--trials", type=int, default=200)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float, default=1e-9)
    common.add_argument("--precision-bits", type=int, default=256)
    common.add_argument("--out", default=None)
    common.add_argument("--budget", type=int, default=None, help="max basis size (default 4096; MOELAB_BUDGET wins)")

    p = argparse.ArgumentParser(prog="moelab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("group").add_subparsers(dest="sub", required=True)
    gi = g.add_parser("info", parents=[common])
    gi.add_argument("--G", required=True)
    gi.set_defaults(func=cmd_group_info)

    c = sub.add_parser("constants", parents=[common])
    c.add_argument("--G", required=True)
    c.set_defaults(func=cmd_constants)

    n = sub.add_parser("norm", parents=[common])
    n.add_argument("--G", required=True)
    n.add_argument("--f", default=None, help='"uniform" or terms like "1:a + 0.5:b"')
    n.set_defaults(func=cmd_norm)

    v = sub.add_parser("verify").add_subparsers(dest="sub", required=True)
    for name in ("srd", "power", "freeprod"):
        vp = v.add_parser(name, parents=[common])
        vp.add_argument("--G", required=True)
        vp.set_defaults(func=cmd_verify)
        if name == "srd":
            vp.add_argument("--H", required=True)
            vp.add_argument("--p", type=float, default=None)
            vp.add_argument("--q", type=float, default=None)
        if name == "power":
            vp.add_argument("--n", type=int, required=True)
            vp.add_argument("--m", type=int, required=True)
            vp.add_argument("--p", type=float, default=None)

    ch = sub.add_parser("channel").add_subparsers(dest="sub", required=True)
    ce = ch.add_parser("entropy", parents=[common])
    ce.add_argument("--G", required=True)
    ce.add_argument("--input", choices=["delta_e", "random"], default="delta_e")
    ce.add_argument("--composed", action="store_true")
    ce.add_argument("--q", type=float, default=None, help="run the l2 deviation check with this constant")
    ce.set_defaults(func=cmd_channel_entropy)

    m = sub.add_parser("moe", parents=[common])
    m.add_argument("--G", required=True)
    m.add_argument("--restarts", type=int, default=32)
    m.set_defaults(func=cmd_moe)

    ct = sub.add_parser("certify").add_subparsers(dest="sub", required=True)
    cm = ct.add_parser("main", parents=[common])
    cm.add_argument("--G", required=True)
    cm.add_argument("--q", default=None, help='e.g. "sqrt(14)", "5*sqrt(6)", "3.5"')
    cm.set_defaults(func=cmd_certify)
    cf = ct.add_parser("freeprod", parents=[common])
    cf.add_argument("--M", type=int, required=True)
    cf.add_argument("--factors", required=True)
    cf.add_argument("--copies", default="1")
    cf.set_defaults(func=cmd_certify)
    return p


def _emit(doc: dict, out: str | None) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True, default=str) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        config = _config(args)
        report, status = args.func(args)
    except SpecSyntaxError as exc:
        print(f"moelab: group spec error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except UsageError as exc:
        print(f"moelab: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BudgetError as exc:
        print(f"moelab: budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (GroupError, ValueError) as exc:
        print(f"moelab: {exc}", file=sys.stderr)
        return EXIT_USAGE
    doc = {"config": asdict(config), "report": report}
    if status is not None:
        doc["status"] = status
    _emit(doc, config.out)
    verdict = report.get("verdict") if isinstance(report, dict) else None
    print(f"moelab {config.command}: {verdict or status or 'done'}", file=sys.stderr)
    return EXIT_FAIL if status == "FAIL" else EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
