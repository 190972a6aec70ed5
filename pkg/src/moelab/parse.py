"""Parser for the group-spec grammar used by the CLI and config files.

    spec    := product
    product := power ("*" power)*
    power   := atom ("^" INT)*
    atom    := "Z" INT ["[" INT ("," INT)* "]"]
             | "F" INT | "F(" BIGINT ")"
             | "table:" PATH
             | "freepow(" spec "," BIGINT ")"
             | "(" spec ")"
    BIGINT  := INT | INT "^" INT          e.g. 10^84

``str(parse_spec(s))`` is the canonical form and parses back to an equal spec.
"""

from __future__ import annotations

from .groups import Cyclic, DirectPower, FiniteTable, Free, FreeProduct, GroupSpec


class SpecSyntaxError(ValueError):
    def __init__(self, message: str, text: str, pos: int):
        self.text = text
        self.pos = pos
        super().__init__(f"{message} at position {pos}\n  {text}\n  {' ' * pos}^")


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.grouped: set[int] = set()

    def error(self, message: str):
        raise SpecSyntaxError(message, self.text, self.pos)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self, s: str) -> bool:
        self.skip_ws()
        return self.text.startswith(s, self.pos)

    def expect(self, s: str):
        if not self.peek(s):
            found = self.text[self.pos] if self.pos < len(self.text) else "end of input"
            self.error(f"expected {s!r}, found {found!r}")
        self.pos += len(s)

    def integer(self) -> int:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if start == self.pos:
            self.error("expected an integer")
        return int(self.text[start : self.pos])

    def bigint(self) -> int:
        base = self.integer()
        if self.peek("^"):
            self.pos += 1
            return base ** self.integer()
        return base

    def spec(self) -> GroupSpec:
        parts = [self.power()]
        while self.peek("*"):
            self.pos += 1
            parts.append(self.power())
        if len(parts) == 1:
            return parts[0]
        factors = []
        for p in parts:
            if isinstance(p, FreeProduct) and id(p) not in self.grouped:
                factors.extend(p.factors)
            else:
                factors.append((p, 1))
        return FreeProduct(tuple(factors))

    def power(self) -> GroupSpec:
        g = self.atom()
        while self.peek("^"):
            self.pos += 1
            g = DirectPower(g, self.integer())
        return g

    def atom(self) -> GroupSpec:
        self.skip_ws()
        start = self.pos
        try:
            if self.peek("Z"):
                self.pos += 1
                n = self.integer()
                if self.peek("["):
                    self.pos += 1
                    gens = [self.integer()]
                    while self.peek(","):
                        self.pos += 1
                        gens.append(self.integer())
                    self.expect("]")
                    return Cyclic(n, tuple(gens))
                return Cyclic(n)
            if self.peek("F"):
                self.pos += 1
                if self.peek("("):
                    self.pos += 1
                    rank = self.bigint()
                    self.expect(")")
                    return Free(rank)
                return Free(self.integer())
            if self.peek("table:"):
                self.pos += len("table:")
                end = self.pos
                while end < len(self.text) and self.text[end] not in "*^,)":
                    end += 1
                path = self.text[self.pos : end].strip()
                if not path:
                    self.error("expected a path")
                self.pos = end
                return FiniteTable.from_json(path)
            if self.peek("freepow("):
                self.pos += len("freepow(")
                inner = self.spec()
                self.expect(",")
                mult = self.bigint()
                self.expect(")")
                return FreeProduct(((inner, mult),))
            if self.peek("("):
                self.pos += 1
                inner = self.spec()
                self.expect(")")
                self.grouped.add(id(inner))
                return inner
        except SpecSyntaxError:
            raise
        except (ValueError, OSError) as exc:
            self.pos = start
            self.error(str(exc))
        found = self.text[self.pos] if self.pos < len(self.text) else "end of input"
        self.error(f"unexpected {found!r}")


def parse_spec(text: str) -> GroupSpec:
    p = _Parser(text)
    spec = p.spec()
    p.skip_ws()
    if p.pos != len(p.text):
        p.error(f"unexpected {p.text[p.pos]!r}")
    return spec
