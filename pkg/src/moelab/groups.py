"""Group element arithmetic with unique normal forms.

Every group is described by an immutable spec object.  Elements are plain
hashable Python values in normal form, so equality of elements is equality
of values:

    Cyclic        int residue in [0, n)
    FiniteTable   int index into the element list
    Free          tuple of signed letters (1..rank, negative = inverse), reduced
    FreeProduct   tuple of (factor index, factor element) syllables, alternating
    DirectPower   tuple of base elements

Word length follows the positive-word convention: ``|g|`` is the least number
of generators (never their inverses) whose product is ``g``.
"""

from __future__ import annotations

import bisect
import itertools
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Hashable, Iterable, Sequence

import numpy as np

Element = Hashable

DEFAULT_BUDGET = 4096
BUDGET_ENV = "MOELAB_BUDGET"


class GroupError(ValueError):
    """Malformed spec or element normal form."""


class BudgetError(RuntimeError):
    """An enumeration would exceed the configured cardinality budget."""

    def __init__(self, what: str, size: int | None, budget: int):
        self.what = what
        self.size = size
        self.budget = budget
        shown = "unbounded" if size is None else str(size)
        super().__init__(f"{what}: cardinality {shown} exceeds budget {budget}")


@dataclass(frozen=True)
class Exceeds:
    """Marker for a search that gave up at ``cutoff`` without an answer."""

    cutoff: int

    def __str__(self) -> str:
        return f"> {self.cutoff}"


def get_budget(budget: int | None = None) -> int:
    """Resolve the basis-size budget; the environment variable wins."""
    env = os.environ.get(BUDGET_ENV)
    if env:
        return int(env)
    return DEFAULT_BUDGET if budget is None else int(budget)


def format_bigint(n: int) -> str:
    if n >= 1000:
        k = len(str(n)) - 1
        if n == 10**k:
            return f"10^{k}"
    return str(n)


class GroupSpec:
    """Common interface.  Subclasses are frozen dataclasses."""

    def identity(self) -> Element:
        raise NotImplementedError

    def multiply(self, a: Element, b: Element) -> Element:
        raise NotImplementedError

    def inverse(self, a: Element) -> Element:
        raise NotImplementedError

    def validate(self, a: Any) -> Element:
        raise NotImplementedError

    @property
    def generators(self) -> tuple:
        raise NotImplementedError

    @property
    def generator_count(self) -> int:
        return len(self.generators)

    @property
    def order(self) -> int | None:
        """Group order, or None when infinite."""
        return None

    @property
    def is_finite(self) -> bool:
        return self.order is not None

    def format(self, a: Element) -> str:
        return str(a)

    def parse_element(self, text: str) -> Element:
        raise GroupError(f"element parsing not supported for {self}")

    def sort_key(self, a: Element):
        return a

    def power(self, a: Element, k: int) -> Element:
        if k < 0:
            a, k = self.inverse(a), -k
        result, base = self.identity(), a
        while k:
            if k & 1:
                result = self.multiply(result, base)
            base = self.multiply(base, base)
            k >>= 1
        return result

    def positive_length(self, g: Element, cutoff: int, budget: int) -> int | float | Exceeds:
        return _bfs_word_length(self, g, cutoff, budget)


# ---------------------------------------------------------------------------
# concrete specs


@dataclass(frozen=True)
class Cyclic(GroupSpec):
    n: int
    gens: tuple[int, ...] = (1,)

    def __post_init__(self):
        if self.n < 1:
            raise GroupError(f"cyclic order must be positive, got {self.n}")
        gens = tuple(int(s) % self.n for s in self.gens) if self.n > 1 else ()
        object.__setattr__(self, "gens", gens)
        if self.n > 1 and not gens:
            raise GroupError("empty generating set")
        if 0 in gens:
            raise GroupError("generators may not contain the neutral element")
        if len(set(gens)) != len(gens):
            raise GroupError("repeated generator")
        if self.n > 1 and math.gcd(self.n, *gens) != 1:
            raise GroupError(f"{list(gens)} does not generate Z{self.n}")

    def __str__(self) -> str:
        if self.gens == ((1,) if self.n > 1 else ()):
            return f"Z{self.n}"
        return f"Z{self.n}[{','.join(map(str, self.gens))}]"

    def identity(self):
        return 0

    def multiply(self, a, b):
        return (a + b) % self.n

    def inverse(self, a):
        return (-a) % self.n

    def validate(self, a):
        if isinstance(a, bool) or not isinstance(a, (int, np.integer)) or not 0 <= a < self.n:
            raise GroupError(f"{a!r} is not a residue mod {self.n}")
        return int(a)

    @property
    def generators(self):
        return self.gens

    @property
    def order(self):
        return self.n

    def parse_element(self, text):
        return self.validate(int(text))


@dataclass(frozen=True)
class FiniteTable(GroupSpec):
    """Finite group given by its multiplication table (row-major, by index)."""

    elements: tuple[str, ...]
    table: tuple[tuple[int, ...], ...]
    gens: tuple[int, ...]
    source: str | None = field(default=None, compare=False)
    _identity: int = field(default=0, init=False, repr=False, compare=False)
    _inverses: tuple[int, ...] = field(default=(), init=False, repr=False, compare=False)

    def __post_init__(self):
        n = len(self.elements)
        if n == 0:
            raise GroupError("empty element list")
        if len(set(self.elements)) != n:
            raise GroupError("duplicate element labels")
        t = np.asarray(self.table, dtype=np.int64)
        if t.shape != (n, n):
            raise GroupError(f"table must be {n}x{n}, got shape {t.shape}")
        if t.min() < 0 or t.max() >= n:
            raise GroupError("table entry out of range")
        ident = [e for e in range(n) if (t[e] == np.arange(n)).all() and (t[:, e] == np.arange(n)).all()]
        if not ident:
            raise GroupError("table has no two-sided identity")
        e = ident[0]
        inverses = []
        for a in range(n):
            right = np.flatnonzero(t[a] == e)
            if len(right) != 1 or t[right[0], a] != e:
                raise GroupError(f"element {self.elements[a]!r} has no two-sided inverse")
            inverses.append(int(right[0]))
        # associativity, one left factor at a time to bound memory
        for a in range(n):
            if not (t[t[a]] == t[a][t]).all():
                raise GroupError(f"table is not associative (left factor {self.elements[a]!r})")
        gens = tuple(int(g) for g in self.gens)
        if any(not 0 <= g < n for g in gens):
            raise GroupError("generator index out of range")
        if e in gens:
            raise GroupError("generators may not contain the neutral element")
        if len(set(gens)) != len(gens):
            raise GroupError("repeated generator")
        object.__setattr__(self, "gens", gens)
        object.__setattr__(self, "table", tuple(tuple(int(x) for x in row) for row in t))
        object.__setattr__(self, "_identity", e)
        object.__setattr__(self, "_inverses", tuple(inverses))

    @classmethod
    def from_json(cls, path: str | os.PathLike) -> "FiniteTable":
        """Load ``{"elements": [...], "table": [[label, ...], ...], "generators": [...]}``.

        Table cells may be labels or integer indices.
        """
        data = json.loads(Path(path).read_text())
        labels = [str(x) for x in data["elements"]]
        index = {lab: i for i, lab in enumerate(labels)}

        def idx(x):
            if isinstance(x, int) and not isinstance(x, bool):
                return x
            try:
                return index[str(x)]
            except KeyError:
                raise GroupError(f"unknown element label {x!r}") from None

        table = tuple(tuple(idx(x) for x in row) for row in data["table"])
        gens = tuple(idx(x) for x in data.get("generators", []))
        return cls(tuple(labels), table, gens, source=str(path))

    def __str__(self) -> str:
        return f"table:{self.source}" if self.source else f"table<{len(self.elements)}>"

    def identity(self):
        return self._identity

    def multiply(self, a, b):
        return self.table[a][b]

    def inverse(self, a):
        return self._inverses[a]

    def validate(self, a):
        if isinstance(a, bool) or not isinstance(a, (int, np.integer)) or not 0 <= a < len(self.elements):
            raise GroupError(f"{a!r} is not an element index")
        return int(a)

    @property
    def generators(self):
        return self.gens

    @property
    def order(self):
        return len(self.elements)

    def format(self, a):
        return self.elements[a]

    def parse_element(self, text):
        try:
            return self.elements.index(text)
        except ValueError:
            raise GroupError(f"unknown element label {text!r}") from None


_LETTERS = "abcdefghijklmnopqrstuvwxyz"


def _free_reduce_append(word: list[int], letter: int) -> None:
    if word and word[-1] == -letter:
        word.pop()
    else:
        word.append(letter)


@dataclass(frozen=True)
class Free(GroupSpec):
    rank: int

    def __post_init__(self):
        if self.rank < 1:
            raise GroupError(f"free rank must be positive, got {self.rank}")

    def __str__(self) -> str:
        r = format_bigint(self.rank)
        return f"F({r})" if "^" in r else f"F{r}"

    def identity(self):
        return ()

    def multiply(self, a, b):
        # cancel at the junction only; both inputs are already reduced
        i = 0
        while i < min(len(a), len(b)) and a[len(a) - 1 - i] == -b[i]:
            i += 1
        return a[: len(a) - i] + b[i:]

    def inverse(self, a):
        return tuple(-x for x in reversed(a))

    def validate(self, a):
        if not isinstance(a, tuple):
            raise GroupError(f"free-group element must be a tuple of letters, got {a!r}")
        for i, x in enumerate(a):
            if isinstance(x, bool) or not isinstance(x, int) or x == 0 or abs(x) > self.rank:
                raise GroupError(f"bad letter {x!r} for F{self.rank}")
            if i and a[i - 1] == -x:
                raise GroupError(f"word {a!r} is not reduced")
        return a

    def letter(self, i: int) -> tuple[int]:
        """The ``i``-th standard generator (0-based) as an element."""
        return (i + 1,)

    def word(self, text: str) -> tuple[int, ...]:
        return self.parse_element(text)

    @property
    def generators(self):
        if self.rank > 10**7:
            raise BudgetError(f"generators of {self}", self.rank, 10**7)
        return tuple((i,) for i in range(1, self.rank + 1))

    @property
    def generator_count(self):
        return self.rank

    def format(self, a):
        if not a:
            return "e"
        out = []
        for x in a:
            name = _LETTERS[abs(x) - 1] if self.rank <= 26 else f"x{abs(x)}"
            out.append(name if x > 0 else name + "^-1")
        return "".join(out) if self.rank <= 26 else ".".join(out)

    def parse_element(self, text):
        text = text.strip()
        if text in ("", "e", "1"):
            return ()
        word: list[int] = []
        pos = 0
        while pos < len(text):
            ch = text[pos]
            if ch in ". ":
                pos += 1
                continue
            if self.rank > 26 or ch == "x":
                j = pos + 1
                while j < len(text) and text[j].isdigit():
                    j += 1
                letter = int(text[pos + 1 : j])
                pos = j
            elif ch in _LETTERS:
                letter = _LETTERS.index(ch) + 1
                pos += 1
            elif ch in _LETTERS.upper():
                letter = -(_LETTERS.upper().index(ch) + 1)
                pos += 1
            else:
                raise GroupError(f"unexpected {ch!r} at position {pos} in {text!r}")
            if text.startswith("^-1", pos):
                letter, pos = -letter, pos + 3
            if abs(letter) > self.rank or letter == 0:
                raise GroupError(f"letter out of range at position {pos} in {text!r}")
            _free_reduce_append(word, letter)
        return tuple(word)

    def sort_key(self, a):
        # positive letters before inverses, then by index
        return tuple((abs(x), x < 0) for x in a)

    def positive_length(self, g, cutoff, budget):
        if any(x < 0 for x in g) or len(g) > cutoff:
            return Exceeds(cutoff)
        return len(g)


@dataclass(frozen=True)
class FreeProduct(GroupSpec):
    """Free product of ``sum(multiplicities)`` factors.

    Factor indices in elements run over the expanded list, so
    ``freepow(Z5, 3)`` has factors 0, 1, 2, all copies of Z5.  Multiplicities
    may be astronomically large; only operations that enumerate generators
    are then refused.
    """

    factors: tuple[tuple[GroupSpec, int], ...]
    _offsets: tuple[int, ...] = field(default=(), init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.factors:
            raise GroupError("free product needs at least one factor")
        offsets = [0]
        norm = []
        for spec, mult in self.factors:
            if not isinstance(spec, GroupSpec):
                raise GroupError(f"factor {spec!r} is not a group spec")
            if int(mult) < 1:
                raise GroupError(f"multiplicity must be positive, got {mult}")
            norm.append((spec, int(mult)))
            offsets.append(offsets[-1] + int(mult))
        object.__setattr__(self, "factors", tuple(norm))
        object.__setattr__(self, "_offsets", tuple(offsets))

    def __str__(self) -> str:
        parts = []
        for spec, mult in self.factors:
            s = str(spec)
            if mult == 1:
                parts.append(f"({s})" if isinstance(spec, FreeProduct) else s)
            else:
                parts.append(f"freepow({s},{format_bigint(mult)})")
        return "*".join(parts)

    @property
    def factor_count(self) -> int:
        return self._offsets[-1]

    def factor(self, k: int) -> GroupSpec:
        if not 0 <= k < self.factor_count:
            raise GroupError(f"factor index {k} out of range")
        return self.factors[bisect.bisect_right(self._offsets, k) - 1][0]

    def distinct_factors(self) -> list[GroupSpec]:
        seen = []
        for spec, _ in self.factors:
            if spec not in seen:
                seen.append(spec)
        return seen

    def embed(self, k: int, a: Element) -> Element:
        """Image of the factor-``k`` element ``a``."""
        f = self.factor(k)
        a = f.validate(a)
        return () if a == f.identity() else ((k, a),)

    def identity(self):
        return ()

    def multiply(self, a, b):
        left = list(a)
        right = list(b)
        while left and right and left[-1][0] == right[0][0]:
            k = left[-1][0]
            f = self.factor(k)
            c = f.multiply(left[-1][1], right[0][1])
            left.pop()
            right.pop(0)
            if c != f.identity():
                left.append((k, c))
                break
        return tuple(left + right)

    def inverse(self, a):
        return tuple((k, self.factor(k).inverse(x)) for k, x in reversed(a))

    def validate(self, a):
        if not isinstance(a, tuple):
            raise GroupError(f"free-product element must be a tuple of syllables, got {a!r}")
        out = []
        prev = None
        for syl in a:
            if not (isinstance(syl, tuple) and len(syl) == 2):
                raise GroupError(f"bad syllable {syl!r}")
            k, x = syl
            f = self.factor(k)
            x = f.validate(x)
            if x == f.identity():
                raise GroupError(f"syllable {syl!r} is the neutral element")
            if k == prev:
                raise GroupError(f"consecutive syllables from factor {k} in {a!r}")
            out.append((k, x))
            prev = k
        return tuple(out)

    @property
    def generators(self):
        count = self.generator_count
        if count > 10**7:
            raise BudgetError(f"generators of {self}", count, 10**7)
        return tuple(((k, s),) for k in range(self.factor_count) for s in self.factor(k).generators)

    @property
    def generator_count(self):
        return sum(mult * spec.generator_count for spec, mult in self.factors)

    @property
    def order(self):
        if self.factor_count == 1:
            return self.factors[0][0].order
        if all(spec.order == 1 for spec, _ in self.factors):
            return 1
        return None

    def format(self, a):
        if not a:
            return "e"
        return " ".join(f"[{k}:{self.factor(k).format(x)}]" for k, x in a)

    def parse_element(self, text):
        """Parse ``[k:x] [k':y] ...`` syllables."""
        g = ()
        for chunk in text.replace("]", "] ").split():
            if chunk in ("e",):
                continue
            if not (chunk.startswith("[") and chunk.endswith("]") and ":" in chunk):
                raise GroupError(f"bad syllable {chunk!r}; expected [factor:element]")
            k_text, x_text = chunk[1:-1].split(":", 1)
            k = int(k_text)
            g = self.multiply(g, self.embed(k, self.factor(k).parse_element(x_text)))
        return g

    def sort_key(self, a):
        return tuple((k, self.factor(k).sort_key(x)) for k, x in a)

    def positive_length(self, g, cutoff, budget):
        total = 0
        for k, x in g:
            n = self.factor(k).positive_length(x, cutoff, budget)
            if not isinstance(n, int):
                return n
            total += n
            if total > cutoff:
                return Exceeds(cutoff)
        return total


@dataclass(frozen=True)
class DirectPower(GroupSpec):
    base: GroupSpec
    exponent: int

    def __post_init__(self):
        if self.exponent < 1:
            raise GroupError(f"exponent must be positive, got {self.exponent}")

    def __str__(self) -> str:
        b = str(self.base)
        if isinstance(self.base, (FreeProduct, DirectPower)):
            b = f"({b})"
        return f"{b}^{self.exponent}"

    def identity(self):
        return (self.base.identity(),) * self.exponent

    def multiply(self, a, b):
        return tuple(self.base.multiply(x, y) for x, y in zip(a, b))

    def inverse(self, a):
        return tuple(self.base.inverse(x) for x in a)

    def validate(self, a):
        if not isinstance(a, tuple) or len(a) != self.exponent:
            raise GroupError(f"expected a {self.exponent}-tuple, got {a!r}")
        return tuple(self.base.validate(x) for x in a)

    def coordinate(self, i: int, x: Element) -> Element:
        """Embed ``x`` in coordinate ``i``."""
        e = list(self.identity())
        e[i] = self.base.validate(x)
        return tuple(e)

    @property
    def generators(self):
        return tuple(self.coordinate(i, s) for i in range(self.exponent) for s in self.base.generators)

    @property
    def generator_count(self):
        return self.exponent * self.base.generator_count

    @property
    def order(self):
        o = self.base.order
        return None if o is None else o**self.exponent

    def format(self, a):
        return "(" + ", ".join(self.base.format(x) for x in a) + ")"

    def parse_element(self, text):
        text = text.strip()
        if not (text.startswith("(") and text.endswith(")")):
            raise GroupError(f"expected (x1, ..., xn), got {text!r}")
        parts = [p.strip() for p in text[1:-1].split(",")]
        return self.validate(tuple(self.base.parse_element(p) for p in parts))

    def sort_key(self, a):
        return tuple(self.base.sort_key(x) for x in a)

    def positive_length(self, g, cutoff, budget):
        total = 0
        for x in g:
            n = self.base.positive_length(x, cutoff, budget)
            if not isinstance(n, int):
                return n
            total += n
        return total if total <= cutoff else Exceeds(cutoff)


# ---------------------------------------------------------------------------
# operations


def identity(G: GroupSpec) -> Element:
    return G.identity()


def multiply(G: GroupSpec, a: Element, b: Element) -> Element:
    return G.multiply(G.validate(a), G.validate(b))


def inverse(G: GroupSpec, a: Element) -> Element:
    return G.inverse(G.validate(a))


def product(G: GroupSpec, elements: Iterable[Element]) -> Element:
    g = G.identity()
    for x in elements:
        g = G.multiply(g, x)
    return g


def _bfs_word_length(G, g, cutoff, budget):
    e = G.identity()
    if g == e:
        return 0
    gens = G.generators
    seen = {e}
    frontier = [e]
    for n in range(1, cutoff + 1):
        nxt = []
        for x in frontier:
            for s in gens:
                y = G.multiply(x, s)
                if y in seen:
                    continue
                if y == g:
                    return n
                seen.add(y)
                nxt.append(y)
        if not nxt:
            return math.inf
        if len(seen) > budget:
            raise BudgetError(f"word-length search in {G}", len(seen), budget)
        frontier = nxt
    return Exceeds(cutoff)


def word_length(G: GroupSpec, g: Element, cutoff: int = 64, budget: int | None = None):
    """Positive word length of ``g``.

    Returns an int, ``math.inf`` when the positive-word search exhausts the
    group without reaching ``g``, or ``Exceeds(cutoff)``.
    """
    return G.positive_length(G.validate(g), cutoff, get_budget(budget))


def _bfs(G: GroupSpec, gens: Sequence[Element], m: int | None, budget: int, what: str) -> list[Element]:
    e = G.identity()
    order = [e]
    seen = {e}
    frontier = [e]
    layer = 0
    while frontier and (m is None or layer < m):
        nxt = []
        for x in frontier:
            for s in gens:
                y = G.multiply(x, s)
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
                    if len(seen) > budget:
                        raise BudgetError(what, None if G.order is None else G.order, budget)
        order.extend(nxt)
        frontier = nxt
        layer += 1
    return order


def ball(G: GroupSpec, m: int, budget: int | None = None) -> list[Element]:
    """Elements of positive word length at most ``m``, in canonical BFS order.

    Within a layer, elements appear in discovery order (parent position, then
    generator index), which is deterministic.
    """
    budget = get_budget(budget)
    return _bfs(G, G.generators, m, budget, f"ball of radius {m} in {G}")


def symmetric_generators(G: GroupSpec) -> list[Element]:
    gens = list(G.generators)
    for s in G.generators:
        t = G.inverse(s)
        if t not in gens:
            gens.append(t)
    return gens


def symmetric_ball(G: GroupSpec, m: int, budget: int | None = None) -> list[Element]:
    """Ball of radius ``m`` for the word metric of ``S`` together with ``S^-1``."""
    budget = get_budget(budget)
    return _bfs(G, symmetric_generators(G), m, budget, f"symmetric ball of radius {m} in {G}")


def all_elements(G: GroupSpec, budget: int | None = None) -> list[Element]:
    """Every element of a finite group in positive word-length order, so each
    ball ``B_m`` is a prefix.  In a finite group the positive words already
    reach the whole generated subgroup."""
    budget = get_budget(budget)
    n = G.order
    if n is None:
        raise GroupError(f"{G} is infinite")
    if n > budget:
        raise BudgetError(f"elements of {G}", n, budget)
    out = _bfs(G, list(G.generators), None, budget, f"elements of {G}")
    if len(out) < n:
        # generators span a proper subgroup; append the rest deterministically
        seen = set(out)
        for x in _raw_elements(G):
            if x not in seen:
                out.append(x)
    return out


def _raw_elements(G: GroupSpec):
    if isinstance(G, Cyclic):
        return range(G.n)
    if isinstance(G, FiniteTable):
        return range(len(G.elements))
    if isinstance(G, DirectPower):
        return itertools.product(list(_raw_elements(G.base)), repeat=G.exponent)
    if isinstance(G, FreeProduct) and G.factor_count == 1:
        f = G.factor(0)
        return [G.embed(0, x) for x in _raw_elements(f)]
    raise GroupError(f"cannot enumerate {G}")


def reduced_decomposition(G: FreeProduct, g: Element) -> list[tuple[int, Element]]:
    """Alternating syllables of ``g``; ``len`` of the result is the reduced length."""
    if not isinstance(G, FreeProduct):
        raise GroupError(f"{G} is not a free product")
    return list(G.validate(g))


def reduced_length(G: FreeProduct, g: Element) -> int:
    return len(reduced_decomposition(G, g))


def element_order(G: GroupSpec, g: Element, cutoff: int = 1000) -> int | Exceeds:
    g = G.validate(g)
    e = G.identity()
    x = g
    for k in range(1, cutoff + 1):
        if x == e:
            return k
        x = G.multiply(x, g)
    return Exceeds(cutoff)


def nonidentity_coordinate_count(G: DirectPower, g: Element) -> int:
    if not isinstance(G, DirectPower):
        raise GroupError(f"{G} is not a direct power")
    e = G.base.identity()
    return sum(1 for x in G.validate(g) if x != e)


def is_enumerable(G: GroupSpec, budget: int | None = None) -> bool:
    """True when the generator list can be materialized within budget."""
    try:
        return G.generator_count <= get_budget(budget) and all(
            is_enumerable(spec, budget) for spec in _children(G)
        )
    except BudgetError:
        return False


def _children(G: GroupSpec) -> list[GroupSpec]:
    if isinstance(G, FreeProduct):
        return [spec for spec, _ in G.factors]
    if isinstance(G, DirectPower):
        return [G.base]
    return []
