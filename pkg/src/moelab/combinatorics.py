"""Combinatorial constants of a group with its generating set.

The pair multiplicity counts, for the most popular non-neutral quotient
``g = s^-1 t``, how many generator pairs ``(s, t)`` produce it.  Girth,
minimality of the generating set and involutions in the radius-2 ball are
the hypotheses that force that count down to 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .groups import (
    BudgetError,
    Cyclic,
    Element,
    Exceeds,
    Free,
    FreeProduct,
    GroupError,
    GroupSpec,
    all_elements,
    ball,
    element_order,
    get_budget,
    symmetric_generators,
)

MINIMALITY_LIMIT = 512


class UnsupportedSpecError(GroupError):
    pass


@dataclass(frozen=True)
class PairMultiplicityReport:
    value: int
    witness: Element | None
    pairs: tuple[tuple[Element, Element], ...] = ()
    degenerate: bool = False
    group: GroupSpec | None = field(default=None, compare=False)

    def to_dict(self) -> dict:
        fmt = self.group.format if self.group is not None else str
        return {
            "value": self.value,
            "degenerate": self.degenerate,
            "witness": None if self.witness is None else fmt(self.witness),
            "pairs": [[fmt(s), fmt(t)] for s, t in self.pairs],
        }


def _enumerated_pair_multiplicity(G: GroupSpec, gens) -> PairMultiplicityReport:
    e = G.identity()
    groups: dict[Element, list] = {}
    for s in gens:
        s_inv = G.inverse(s)
        for t in gens:
            g = G.multiply(s_inv, t)
            if g != e:
                groups.setdefault(g, []).append((s, t))
    if not groups:
        return PairMultiplicityReport(1, None, (), True, G)
    # ties broken by first discovery, which follows generator order
    witness = max(groups, key=lambda g: len(groups[g]))
    return PairMultiplicityReport(len(groups[witness]), witness, tuple(groups[witness]), False, G)


def pair_multiplicity(G: GroupSpec, budget: int | None = None) -> PairMultiplicityReport:
    """Exact pair multiplicity by enumerating all ``|S|^2`` generator pairs.

    With a single generator every pair gives the neutral element; the report
    is then flagged degenerate and carries value 1.
    """
    if isinstance(G, FreeProduct) and G.generator_count > get_budget(budget):
        return pair_multiplicity_free_product(G.factors, budget, group=G)
    if isinstance(G, Free) and G.rank > get_budget(budget):
        # distinct letters give pairwise distinct reduced words a_i^-1 a_j
        if G.rank == 1:
            return PairMultiplicityReport(1, None, (), True, G)
        return PairMultiplicityReport(1, (-1, 2), (((1,), (2,)),), False, G)
    gens = G.generators
    if len(gens) > get_budget(budget):
        raise BudgetError(f"generator pairs of {G}", len(gens) ** 2, get_budget(budget) ** 2)
    return _enumerated_pair_multiplicity(G, gens)


def pair_multiplicity_free_product(
    factors, budget: int | None = None, group: FreeProduct | None = None
) -> PairMultiplicityReport:
    """Pair multiplicity of a free product from its factors alone.

    The free-product value is the maximum over factors; repeated factors are
    evaluated once.  With two or more factors, cross-factor quotients are
    non-neutral, so the result is never degenerate.
    """
    factors = tuple((spec, int(mult)) for spec, mult in factors)
    G = group if group is not None else FreeProduct(factors)
    best: PairMultiplicityReport | None = None
    best_index = 0
    offset = 0
    seen: dict[GroupSpec, PairMultiplicityReport] = {}
    for spec, mult in factors:
        if spec not in seen:
            seen[spec] = pair_multiplicity(spec, budget)
            rep = seen[spec]
            if not rep.degenerate and (best is None or rep.value > best.value):
                best, best_index = rep, offset
        offset += mult
    total = G.factor_count
    if best is not None:
        emb = lambda x: G.embed(best_index, x)
        return PairMultiplicityReport(
            best.value, emb(best.witness), tuple((emb(s), emb(t)) for s, t in best.pairs), False, G
        )
    if total >= 2 and G.factor(0).generators and G.factor(1).generators:
        s = G.embed(0, G.factor(0).generators[0])
        t = G.embed(1, G.factor(1).generators[0])
        return PairMultiplicityReport(1, G.multiply(G.inverse(s), t), ((s, t),), False, G)
    return PairMultiplicityReport(1, None, (), True, G)


@dataclass(frozen=True)
class GirthReport:
    value: int | Exceeds
    degenerate: bool = False
    reason: str = ""

    def to_dict(self) -> dict:
        return {"value": str(self.value), "degenerate": self.degenerate, "reason": self.reason}


def _degenerate_girth(G: GroupSpec) -> GirthReport | None:
    gens = list(G.generators)
    for s in gens:
        s_inv = G.inverse(s)
        if s_inv == s:
            return GirthReport(2, True, f"generator {G.format(s)} has order two")
        if s_inv in gens:
            return GirthReport(2, True, f"generators {G.format(s)} and {G.format(s_inv)} are mutually inverse")
    return None


def girth_report(G: GroupSpec, cutoff: int = 64, budget: int | None = None) -> GirthReport:
    """Girth of the undirected simple Cayley graph over ``S`` and ``S^-1``.

    The graph is vertex-transitive, so the shortest cycle through the
    identity is the girth.  BFS from the identity: every non-tree edge
    ``(u, w)`` closes a walk of length ``d(u) + d(w) + 1``.
    """
    if isinstance(G, Free):
        return GirthReport(Exceeds(cutoff), False, "Cayley graph of a free basis is a tree")
    if isinstance(G, FreeProduct):
        # cycles of a free-product Cayley graph live in the factor copies
        reports = [girth_report(spec, cutoff, budget) for spec in G.distinct_factors()]
        finite = [r for r in reports if isinstance(r.value, int)]
        if not finite:
            return GirthReport(Exceeds(cutoff), False, "no factor has a cycle within cutoff")
        return min(finite, key=lambda r: r.value)
    bad = _degenerate_girth(G)
    if bad is not None:
        return bad
    budget = get_budget(budget)
    nbrs = symmetric_generators(G)
    e = G.identity()
    dist = {e: 0}
    parent = {e: None}
    frontier = [e]
    best = math.inf
    while frontier:
        d = dist[frontier[0]]
        # edges leaving layer d close walks of length >= 2d
        if 2 * d >= best or 2 * d > cutoff:
            break
        nxt = []
        for u in frontier:
            for s in nbrs:
                w = G.multiply(u, s)
                if w not in dist:
                    dist[w] = d + 1
                    parent[w] = u
                    nxt.append(w)
                    if len(dist) > budget:
                        raise BudgetError(f"girth search in {G}", G.order, budget)
                elif parent[u] != w:
                    best = min(best, dist[u] + dist[w] + 1)
        frontier = nxt
    if best <= cutoff:
        return GirthReport(int(best))
    return GirthReport(Exceeds(cutoff))


def girth(G: GroupSpec, cutoff: int = 64, budget: int | None = None) -> int | Exceeds:
    return girth_report(G, cutoff, budget).value


def _closure(G: GroupSpec, gens) -> frozenset:
    e = G.identity()
    seen = {e}
    frontier = [e]
    while frontier:
        nxt = []
        for x in frontier:
            for s in gens:
                y = G.multiply(x, s)
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    return frozenset(seen)


def group_rank(G: GroupSpec, budget: int | None = None) -> int:
    """Smallest size of a generating set."""
    if isinstance(G, Free):
        return G.rank
    if isinstance(G, Cyclic):
        return 0 if G.n == 1 else 1
    if isinstance(G, FreeProduct):
        # Grushko: rank is additive over free factors
        return sum(mult * group_rank(spec, budget) for spec, mult in G.factors)
    n = G.order
    if n is None:
        raise UnsupportedSpecError(f"rank of infinite {G} is not supported")
    if n > MINIMALITY_LIMIT:
        raise BudgetError(f"subset search in {G}", n, MINIMALITY_LIMIT)
    elements = all_elements(G, max(n, get_budget(budget)))
    full = frozenset(elements)
    e = G.identity()
    if n == 1:
        return 0
    others = [x for x in elements if x != e]
    for r in range(1, len(G.generators) + 1):
        if _generated_by_some_subset(G, others, r, full):
            return r
    return len(G.generators)


def _generated_by_some_subset(G, others, r, full) -> bool:
    # subgroups are cached so each prefix closure is computed once
    def search(start, chosen, sub):
        if len(chosen) == r:
            return sub == full
        for i in range(start, len(others)):
            x = others[i]
            if x in sub:
                continue
            grown = _closure(G, chosen + [x])
            if grown == full:
                return True
            if len(chosen) + 1 < r and search(i + 1, chosen + [x], grown):
                return True
        return False

    return search(0, [], frozenset([G.identity()]))


def is_minimal_generating_set(G: GroupSpec, budget: int | None = None) -> bool:
    """True iff no generating set smaller than ``S`` exists."""
    if isinstance(G, (Free, Cyclic)):
        return G.generator_count == group_rank(G)
    if isinstance(G, FreeProduct):
        return all(is_minimal_generating_set(spec, budget) for spec in G.distinct_factors())
    return group_rank(G, budget) == len(G.generators)


def ball2_involutions(G: GroupSpec, budget: int | None = None) -> list[Element]:
    if isinstance(G, Free):
        return []
    out = []
    for g in ball(G, 2, budget):
        if element_order(G, g, cutoff=2) == 2:
            out.append(g)
    return out


def ball2_has_involution(G: GroupSpec, budget: int | None = None) -> bool:
    """True iff some element of word length <= 2 has order exactly two."""
    return bool(ball2_involutions(G, budget))
