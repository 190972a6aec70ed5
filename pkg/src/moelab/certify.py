"""Certificates for the additivity-violation hypotheses.

Every hypothesis comparison is decided by strict interval separation.  When
the two enclosures overlap, precision is doubled up to ``PRECISION_CAP`` and
the check is reported DEGENERATE if they still overlap.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction

from .combinatorics import (
    ball2_involutions,
    girth_report,
    is_minimal_generating_set,
    pair_multiplicity,
    pair_multiplicity_free_product,
)
from .groups import BudgetError, Exceeds, FreeProduct, GroupError, GroupSpec, ball, format_bigint
from .harmonic import NormBound, b2_constant
from .interval import DEFAULT_PRECISION, IntervalReal

PASS, FAIL, DEGENERATE = "PASS", "FAIL", "DEGENERATE"
ACCEPT, REJECT = "ACCEPT", "REJECT"
PRECISION_CAP = 4096
NORM_WIDEN = Fraction(1, 10**12)
MIN_GIRTH = 5
SIZE_EXP_FACTOR = 64

GAP_NOTE = "gap in nats; its sign does not depend on the logarithm base"


def kappa(N: int, prec: int = DEFAULT_PRECISION) -> IntervalReal:
    """Enclosure of ``sqrt(N) * sqrt(N^(1/N) - 1) - 1``.

    ``N^(1/N) - 1`` is evaluated as ``expm1(ln N / N)`` so the huge-``N``
    regime keeps full relative accuracy.
    """
    N = int(N)
    if N < 1:
        raise ValueError(f"kappa needs N >= 1, got {N}")
    ln_n = IntervalReal.ln_int(N, prec)
    inner = (ln_n / N).expm1()
    return IntervalReal.from_int(N, prec).sqrt() * inner.sqrt() - 1


def gap_lower_bound(N: int, q: IntervalReal, multiplicity: int, prec: int | None = None) -> IntervalReal:
    """Enclosure of ``ln N / N - ln(1 + q^2 n / N)``.

    Computed regardless of whether the hypothesis holds; certificates decide
    what a non-positive value means.
    """
    N = int(N)
    prec = q.prec if prec is None else prec
    q = q.with_precision(prec)
    ln_n = IntervalReal.ln_int(N, prec)
    q2 = q**2 * int(multiplicity)
    return ln_n / N - (q2 / N).log1p()


def separate(build, prec: int = DEFAULT_PRECISION, cap: int = PRECISION_CAP):
    """Decide ``a < b`` where ``build(prec)`` returns enclosures ``(a, b)``.

    Returns ``(status, a, b, prec_used)``: PASS on ``a.hi < b.lo``, FAIL on
    ``a.lo >= b.hi``, DEGENERATE when the overlap survives ``cap`` bits.
    """
    p = prec
    while True:
        a, b = build(p)
        if a.hi < b.lo:
            return PASS, a, b, p
        if a.lo >= b.hi:
            return FAIL, a, b, p
        if p >= cap:
            return DEGENERATE, a, b, p
        p = min(2 * p, cap)


def _interval_evidence(a: IntervalReal, b: IntervalReal, p: int, lhs: str, rhs: str) -> dict:
    return {"lhs": lhs, "lhs_interval": a.to_list(), "rhs": rhs, "rhs_interval": b.to_list(), "precision_bits": p}


@dataclass(frozen=True)
class Check:
    name: str
    status: str
    evidence: object

    def to_dict(self) -> dict:
        return {"name": self.name, "status": self.status, "evidence": self.evidence}


@dataclass(frozen=True)
class Certificate:
    instance: dict
    checks: tuple[Check, ...]
    kappa: IntervalReal
    q: IntervalReal
    pair_multiplicity: int
    gap: IntervalReal
    precision_bits: int
    notes: tuple[str, ...] = field(default=())

    @property
    def verdict(self) -> str:
        ok = all(c.status == PASS for c in self.checks) and self.gap.lo > 0
        return ACCEPT if ok else REJECT

    @property
    def failed_check(self) -> str | None:
        for c in self.checks:
            if c.status != PASS:
                return c.name
        return None if self.gap.lo > 0 else "gap-positive"

    @property
    def accepted(self) -> bool:
        return self.verdict == ACCEPT

    def to_dict(self) -> dict:
        return {
            "instance": self.instance,
            "checks": [c.to_dict() for c in self.checks],
            "kappa": self.kappa.to_list(),
            "q": self.q.to_list(),
            "pair_multiplicity": self.pair_multiplicity,
            "gap": self.gap.to_list(),
            "gap_units": "nats",
            "verdict": self.verdict,
            "failed_check": self.failed_check,
            "precision_bits": self.precision_bits,
            "notes": list(self.notes),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


_Q_RE = re.compile(r"^(?:(?P<c>[0-9./]+)\*)?sqrt\((?P<r>[0-9./]+)\)$")


def parse_q(text: str, prec: int = DEFAULT_PRECISION) -> IntervalReal:
    """``"sqrt(14)"``, ``"5*sqrt(6)"`` or an exact decimal/rational like ``"3.5"``."""
    s = text.replace(" ", "")
    m = _Q_RE.match(s)
    try:
        if m:
            c = Fraction(m.group("c")) if m.group("c") else Fraction(1)
            return IntervalReal.from_fraction(c, prec) * IntervalReal.sqrt_of(Fraction(m.group("r")), prec)
        return IntervalReal.from_fraction(Fraction(s), prec)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"cannot read q from {text!r}: {exc}") from None


def q_interval(q, prec: int = DEFAULT_PRECISION) -> IntervalReal:
    """Coerce the accepted q forms into an enclosure at ``prec`` bits.

    A float ``NormBound.upper`` is widened upward by a relative ``1e-12`` to
    absorb floating-point error in the numerical norm.
    """
    if isinstance(q, IntervalReal):
        return q.with_precision(prec)
    if isinstance(q, NormBound):
        up = Fraction(q.upper)
        return IntervalReal.from_fraction(up, prec) * IntervalReal.from_fraction(1 + NORM_WIDEN, prec)
    if isinstance(q, tuple) and len(q) >= 2:
        c, r = q[0], q[1]
        return IntervalReal.from_fraction(Fraction(c), prec) * IntervalReal.sqrt_of(Fraction(r), prec)
    if isinstance(q, str):
        return parse_q(q, prec)
    if isinstance(q, (int, Fraction)):
        return IntervalReal.from_fraction(Fraction(q), prec)
    raise TypeError(f"unsupported q of type {type(q).__name__}")


def _q_text(c: int, r: int) -> str:
    return f"sqrt({r})" if c == 1 else f"{c}*sqrt({r})"


def _hypothesis_check(q: IntervalReal, npm: int, n_gens: int, prec: int) -> tuple[Check, IntervalReal]:
    status, a, b, p = separate(lambda pr: (q.with_precision(pr) * IntervalReal.from_int(npm, pr).sqrt(), kappa(n_gens, pr)), prec)
    ev = _interval_evidence(a, b, p, "q * sqrt(pair_multiplicity)", f"kappa({format_bigint(n_gens)})")
    return Check("main-hypothesis", status, ev), b.with_precision(prec)


def certify_main_theorem(G: GroupSpec, q=None, prec: int = DEFAULT_PRECISION, budget: int | None = None) -> Certificate:
    """Certificate that ``G`` with its generators meets the violation hypothesis.

    ``q`` defaults to the registered radius-2 constant of ``G``.
    """
    notes = [GAP_NOTE]
    checks = []
    n_gens = int(G.generator_count)
    instance = {"kind": "main", "group": str(G), "generators": format_bigint(n_gens)}
    if q is None:
        try:
            c, r, method = b2_constant(G, budget)
            q = (c, r)
            instance["q_source"] = f"{method}: {_q_text(c, r)}"
        except (BudgetError, GroupError) as exc:
            checks.append(Check("q-constant", DEGENERATE, str(exc)))
            q = 0
            instance["q_source"] = "unavailable"
    else:
        instance["q_source"] = q if isinstance(q, str) else "supplied"
    qi = q_interval(q, prec)

    try:
        rep = pair_multiplicity(G, budget)
        npm = rep.value
        status = DEGENERATE if rep.degenerate else PASS
        checks.append(Check("pair-multiplicity", status, rep.to_dict()))
    except (BudgetError, GroupError) as exc:
        npm = 1
        checks.append(Check("pair-multiplicity", DEGENERATE, str(exc)))

    if n_gens < 1:
        checks.append(Check("main-hypothesis", DEGENERATE, "empty generating set"))
        k = IntervalReal.from_int(-1, prec)
        gap = IntervalReal.from_int(0, prec)
        return Certificate(instance, tuple(checks), k, qi, npm, gap, prec, tuple(notes))
    hyp, k = _hypothesis_check(qi, npm, n_gens, prec)
    checks.append(hyp)
    gap = gap_lower_bound(n_gens, qi, npm, prec)
    return Certificate(instance, tuple(checks), k, qi, npm, gap, prec, tuple(notes))


def _factor_checks(spec: GroupSpec, M: int, budget):
    """Rank and girth-or-involution evidence for one distinct factor."""
    rank_ok = spec.generator_count <= M and is_minimal_generating_set(spec, budget)
    rank_ev = {
        "factor": str(spec),
        "generators": spec.generator_count,
        "minimal": is_minimal_generating_set(spec, budget),
    }
    invs = ball2_involutions(spec, budget)
    g = girth_report(spec, budget=budget)
    girth_ok = isinstance(g.value, Exceeds) or (not g.degenerate and g.value >= MIN_GIRTH)
    inv_ev = {
        "factor": str(spec),
        "ball2_involutions": [spec.format(x) for x in invs],
        "girth": g.to_dict(),
    }
    return rank_ok, rank_ev, (not invs) or girth_ok, inv_ev


def certify_free_product(M: int, factors, prec: int = DEFAULT_PRECISION, budget: int | None = None) -> Certificate:
    """Certificate for a free product of ``N`` finite factors of rank ``<= M``.

    ``factors`` is a list of ``(spec, multiplicity)`` with big-integer
    multiplicities; ``N`` is the total factor count.  The checks run in a
    fixed order and the first failure names the verdict.
    """
    M = int(M)
    factors = tuple((spec, int(mult)) for spec, mult in factors)
    G = FreeProduct(factors)
    N = G.factor_count
    n_gens = int(G.generator_count)
    K = M * M + M + 1
    instance = {
        "kind": "freeprod",
        "group": str(G),
        "M": M,
        "factor_count": format_bigint(N),
        "generators": format_bigint(n_gens),
    }
    notes = [GAP_NOTE, "girth is checked per factor on (G_i, S_i); the free product's own girth is their minimum"]
    checks: list[Check] = []
    distinct = G.distinct_factors()

    rank_ok, rank_ev, inv_ok, inv_ev = True, [], True, []
    try:
        for spec in distinct:
            r_ok, r_ev, i_ok, i_ev = _factor_checks(spec, M, budget)
            rank_ok &= r_ok
            inv_ok &= i_ok
            rank_ev.append(r_ev)
            inv_ev.append(i_ev)
        checks.append(Check("rank", PASS if rank_ok else FAIL, rank_ev))
        checks.append(Check("order-two-or-girth", PASS if inv_ok else FAIL, inv_ev))
    except (BudgetError, GroupError) as exc:
        checks.append(Check("rank", DEGENERATE, str(exc)))

    # 64 (M^2+M+1) < ln N, without ever forming e^(64 (M^2+M+1))
    status, a, b, p = separate(lambda pr: (IntervalReal.from_int(SIZE_EXP_FACTOR * K, pr), IntervalReal.ln_int(N, pr)), prec)
    checks.append(Check("size-exp", status, _interval_evidence(a, b, p, f"{SIZE_EXP_FACTOR}*(M^2+M+1)", "ln(N)")))

    try:
        rep = pair_multiplicity_free_product(factors, budget, group=G)
        npm = rep.value
        ok = rep.value == 1 and not rep.degenerate
        checks.append(Check("pair-multiplicity", PASS if ok else FAIL, rep.to_dict()))
    except (BudgetError, GroupError) as exc:
        npm = 1
        checks.append(Check("pair-multiplicity", DEGENERATE, str(exc)))

    try:
        sizes = {str(spec): len(ball(spec, 2, budget)) for spec in distinct}
        worst = max(sizes.values())
        ok = worst <= K
        checks.append(Check("factor-constants", PASS if ok else FAIL, {"ball2_sizes": sizes, "bound": K}))
    except (BudgetError, GroupError) as exc:
        worst = K
        checks.append(Check("factor-constants", DEGENERATE, str(exc)))
    qi = q_interval((5, 2 * worst), prec)
    instance["q_source"] = f"free-product: {_q_text(5, 2 * worst)}"

    chain = [
        ("5*sqrt(2)*sqrt(M^2+M+1) + 1", "8*sqrt(M^2+M+1)",
         lambda pr: (IntervalReal.from_int(50 * K, pr).sqrt() + 1, IntervalReal.from_int(64 * K, pr).sqrt())),
        ("8*sqrt(M^2+M+1)", "sqrt(ln N)",
         lambda pr: (IntervalReal.from_int(64 * K, pr).sqrt(), IntervalReal.ln_int(N, pr).sqrt())),
        ("sqrt(ln N)", "sqrt(N) * sqrt(N^(1/N) - 1)",
         lambda pr: (IntervalReal.ln_int(N, pr).sqrt(), kappa(N, pr) + 1)),
    ]
    links = []
    chain_status = PASS
    for lhs, rhs, build in chain:
        status, a, b, p = separate(build, prec)
        links.append(_interval_evidence(a, b, p, lhs, rhs))
        if status != PASS and chain_status == PASS:
            chain_status = status
    checks.append(Check("constant-chain", chain_status, links))

    hyp, k = _hypothesis_check(qi, npm, n_gens, prec)
    checks.append(hyp)
    gap = gap_lower_bound(n_gens, qi, npm, prec)
    return Certificate(instance, tuple(checks), k, qi, npm, gap, prec, tuple(notes))


def kappa_monotone_on(lo: int, hi: int, prec: int = 128) -> tuple[bool, int | None]:
    """Check ``kappa(N+1).lo > kappa(N).hi`` for ``lo <= N < hi``.

    Returns ``(ok, first_failing_N)``.
    """
    prev = kappa(lo, prec)
    for n in range(lo + 1, hi + 1):
        cur = kappa(n, prec)
        if not cur.lo > prev.hi:
            return False, n - 1
        prev = cur
    return True, None
