"""LTL syntax trees, a concrete grammar, and semantics on lasso words.

A lasso word prefix . loop^w is a finite certificate for an infinite
trace, so formulas can be model-checked against it exactly.
"""

from __future__ import annotations

import re
from dataclasses import dataclass


class LtlSyntaxError(ValueError):
    """Malformed formula text; `position` is a 0-based character offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (position {position})")
        self.position = position


@dataclass(frozen=True)
class Formula:
    pass


@dataclass(frozen=True)
class TrueBool(Formula):
    pass


@dataclass(frozen=True)
class FalseBool(Formula):
    pass


@dataclass(frozen=True)
class Prop(Formula):
    name: str


@dataclass(frozen=True)
class Not(Formula):
    child: Formula


@dataclass(frozen=True)
class Next(Formula):
    child: Formula


@dataclass(frozen=True)
class Always(Formula):
    child: Formula


@dataclass(frozen=True)
class Eventually(Formula):
    child: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class LassoWord:
    """Ultimately periodic word: `prefix` then `loop` repeated forever."""

    prefix: tuple[frozenset[str], ...]
    loop: tuple[frozenset[str], ...]

    def __post_init__(self):
        if len(self.loop) == 0:
            raise ValueError("lasso loop must be nonempty")


def children(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, (TrueBool, FalseBool, Prop)):
        return ()
    if isinstance(f, (Not, Next, Always, Eventually)):
        return (f.child,)
    return (f.left, f.right)


def rebuild(f: Formula, kids: tuple[Formula, ...]) -> Formula:
    """Copy of `f` with its children replaced in order."""
    if isinstance(f, (TrueBool, FalseBool, Prop)):
        return f
    if isinstance(f, (Not, Next, Always, Eventually)):
        return type(f)(kids[0])
    return type(f)(kids[0], kids[1])


def subtrees(f: Formula):
    """All subtree roots of `f` in preorder (including `f` itself)."""
    stack = [f]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(children(node)))


def complexity(f: Formula) -> int:
    """Number of nodes in the syntax tree."""
    return sum(1 for _ in subtrees(f))


def propositions(f: Formula) -> frozenset[str]:
    return frozenset(n.name for n in subtrees(f) if isinstance(n, Prop))


def render(f: Formula) -> str:
    """Canonical fully parenthesized form; parse(render(f)) == f."""
    if isinstance(f, TrueBool):
        return "true"
    if isinstance(f, FalseBool):
        return "false"
    if isinstance(f, Prop):
        return f.name
    if isinstance(f, Not):
        return f"! ({render(f.child)})"
    if isinstance(f, Next):
        return f"X ({render(f.child)})"
    if isinstance(f, Always):
        return f"G ({render(f.child)})"
    if isinstance(f, Eventually):
        return f"F ({render(f.child)})"
    if isinstance(f, And):
        return f"({render(f.left)}) & ({render(f.right)})"
    if isinstance(f, Or):
        return f"({render(f.left)}) | ({render(f.right)})"
    if isinstance(f, Implies):
        return f"({render(f.left)}) -> ({render(f.right)})"
    if isinstance(f, Until):
        return f"({render(f.left)}) U ({render(f.right)})"
    raise TypeError(f"not a formula node: {f!r}")


_TOKEN_RE = re.compile(r"\s*(->|\||&|!|\(|\)|[A-Za-z_][A-Za-z0-9_]*)")

# (token, binding power, right-associative, node class)
_INFIX = {
    "->": (10, True, Implies),
    "|": (20, False, Or),
    "&": (30, False, And),
    "U": (50, True, Until),
}
_UNARY_BP = 40
_UNARY = {"!": Not, "X": Next, "G": Always, "F": Eventually}
_KEYWORDS = {"true", "false", "U", "X", "G", "F"}


def _tokenize(text: str) -> list[tuple[str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            at = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise LtlSyntaxError(f"unexpected character {text[at]!r}", at)
        tokens.append((m.group(1), m.start(1)))
        pos = m.end()
    tokens.append(("", len(text)))
    return tokens


class _Parser:
    """Precedence-climbing parser.

    Precedence, loosest to tightest: -> (right), |, &, unary !/X/G/F,
    U (right, binds tighter than &).
    """

    def __init__(self, text: str, alphabet: frozenset[str]):
        self.tokens = _tokenize(text)
        self.alphabet = alphabet
        self.i = 0

    def peek(self) -> tuple[str, int]:
        return self.tokens[self.i]

    def advance(self) -> tuple[str, int]:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def parse(self) -> Formula:
        f = self.expr(0)
        tok, at = self.peek()
        if tok != "":
            raise LtlSyntaxError(f"unexpected token {tok!r}", at)
        return f

    def expr(self, min_bp: int) -> Formula:
        lhs = self.primary()
        while True:
            tok, _ = self.peek()
            if tok not in _INFIX:
                break
            bp, right_assoc, cls = _INFIX[tok]
            if bp < min_bp:
                break
            self.advance()
            rhs = self.expr(bp if right_assoc else bp + 1)
            lhs = cls(lhs, rhs)
        return lhs

    def primary(self) -> Formula:
        tok, at = self.advance()
        if tok == "":
            raise LtlSyntaxError("unexpected end of input", at)
        if tok in _UNARY:
            return _UNARY[tok](self.expr(_UNARY_BP))
        if tok == "(":
            inner = self.expr(0)
            close, cat = self.advance()
            if close != ")":
                raise LtlSyntaxError("expected ')'", cat)
            return inner
        if tok == "true":
            return TrueBool()
        if tok == "false":
            return FalseBool()
        if tok == ")" or tok in _INFIX:
            raise LtlSyntaxError(f"unexpected token {tok!r}", at)
        if tok not in self.alphabet:
            raise LtlSyntaxError(f"unknown proposition {tok!r}", at)
        return Prop(tok)


def parse(text: str, alphabet) -> Formula:
    """Parse `text` against the declared proposition alphabet."""
    return _Parser(text, frozenset(alphabet)).parse()


def eval_lasso(f: Formula, w: LassoWord) -> bool:
    """Whether the infinite word denoted by `w` satisfies `f`.

    Positions live in the finite quotient 0..len(prefix)+len(loop)-1;
    the successor of the last loop position wraps to the loop start.
    Temporal operators walk the position cycle, so every fixpoint is
    decided exactly.
    """
    n = len(w.prefix) + len(w.loop)
    lp = len(w.prefix)

    def succ(i: int) -> int:
        return i + 1 if i + 1 < n else lp

    def val(i: int) -> frozenset[str]:
        return w.prefix[i] if i < lp else w.loop[i - lp]

    memo: dict[tuple[int, int], bool] = {}

    def ev(g: Formula, i: int) -> bool:
        key = (id(g), i)
        got = memo.get(key)
        if got is not None:
            return got
        if isinstance(g, TrueBool):
            out = True
        elif isinstance(g, FalseBool):
            out = False
        elif isinstance(g, Prop):
            out = g.name in val(i)
        elif isinstance(g, Not):
            out = not ev(g.child, i)
        elif isinstance(g, And):
            out = ev(g.left, i) and ev(g.right, i)
        elif isinstance(g, Or):
            out = ev(g.left, i) or ev(g.right, i)
        elif isinstance(g, Implies):
            out = (not ev(g.left, i)) or ev(g.right, i)
        elif isinstance(g, Next):
            out = ev(g.child, succ(i))
        elif isinstance(g, Always):
            out = True
            j, seen = i, set()
            while j not in seen:
                seen.add(j)
                if not ev(g.child, j):
                    out = False
                    break
                j = succ(j)
        elif isinstance(g, Eventually):
            out = False
            j, seen = i, set()
            while j not in seen:
                seen.add(j)
                if ev(g.child, j):
                    out = True
                    break
                j = succ(j)
        elif isinstance(g, Until):
            # r must occur; l holds strictly before it.  A full cycle
            # without r means r never occurs on this path.
            out = False
            j, seen = i, set()
            while j not in seen:
                seen.add(j)
                if ev(g.right, j):
                    out = True
                    break
                if not ev(g.left, j):
                    out = False
                    break
                j = succ(j)
        else:
            raise TypeError(f"not a formula node: {g!r}")
        memo[key] = out
        return out

    return ev(f, 0)
