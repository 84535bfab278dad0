"""Surface language, AST and normalization for Boolean set formulas with operators.

The atoms are the four literal forms

    x = y U z        union
    x = y \\ z        difference
    x = op(x1, ...)  operator application
    x != y           disequality

closed under ``!``, ``&``, ``|``, ``->`` and ``<->``.  Two pieces of sugar
are accepted and desugared by the parser: ``x = y`` (read as ``x = y U y``)
and ``x = 0`` (read as ``x = x \\ x``).

:func:`normalize` turns any formula into a list of
:class:`NormalizedConjunction` whose disjunction is equisatisfiable with the
input.  Negated atoms are eliminated with fresh variables so that every
conjunction only uses the four positive literal forms.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

__all__ = [
    "Union", "Diff", "Op", "Neq", "Literal",
    "Atom", "Not", "And", "Or", "Implies", "Iff", "Formula",
    "NormalizedConjunction", "ParseError",
    "parse", "to_text", "free_vars", "literal_vars", "normalize", "conjunction",
    "BUILTIN_ARITIES",
]

BUILTIN_ARITIES = {"otimes": 2, "times": 2, "pow": 1}


# ---------------------------------------------------------------------------
# Literals


@dataclass(frozen=True, order=True)
class Union:
    x: str
    y: str
    z: str

    def __str__(self):
        return f"{self.x} = {self.y} U {self.z}"


@dataclass(frozen=True, order=True)
class Diff:
    x: str
    y: str
    z: str

    def __str__(self):
        return f"{self.x} = {self.y} \\ {self.z}"


@dataclass(frozen=True, order=True)
class Op:
    x: str
    op: str
    args: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))

    def __str__(self):
        return f"{self.x} = {self.op}({', '.join(self.args)})"


@dataclass(frozen=True, order=True)
class Neq:
    x: str
    y: str

    def __str__(self):
        return f"{self.x} != {self.y}"


Literal = Union | Diff | Op | Neq


def literal_vars(lit: Literal) -> tuple[str, ...]:
    if isinstance(lit, Op):
        return (lit.x, *lit.args)
    if isinstance(lit, Neq):
        return (lit.x, lit.y)
    return (lit.x, lit.y, lit.z)


# ---------------------------------------------------------------------------
# Formulas


@dataclass(frozen=True)
class Atom:
    lit: Literal


@dataclass(frozen=True)
class Not:
    f: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Iff:
    left: "Formula"
    right: "Formula"


Formula = Atom | Not | And | Or | Implies | Iff

_BINARY = (And, Or, Implies, Iff)


def free_vars(f: Formula) -> frozenset[str]:
    """Every variable identifier occurring in ``f``."""
    out: set[str] = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, Atom):
            out.update(literal_vars(g.lit))
        elif isinstance(g, Not):
            stack.append(g.f)
        else:
            stack.append(g.left)
            stack.append(g.right)
    return frozenset(out)


def _atoms(f: Formula) -> Iterator[Literal]:
    if isinstance(f, Atom):
        yield f.lit
    elif isinstance(f, Not):
        yield from _atoms(f.f)
    else:
        yield from _atoms(f.left)
        yield from _atoms(f.right)


# ---------------------------------------------------------------------------
# Parsing

class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} at line {line}, column {col}")
        self.line = line
        self.col = col


_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<iff><->)
  | (?P<imp>->)
  | (?P<neq>!=)
  | (?P<punct>[!&|(),=\\])
  | (?P<zero>0(?![A-Za-z0-9_]))
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
""", re.VERBOSE)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        chunk = m.group()
        if kind not in ("ws", "comment"):
            if kind == "punct":
                kind = chunk
            toks.append(_Tok(kind, chunk, line, pos - line_start + 1))
        nl = chunk.count("\n")
        if nl:
            line += nl
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text: str, arities: Mapping[str, int]):
        self.toks = _tokenize(text)
        self.i = 0
        self.arities = arities

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> _Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg: str, tok: _Tok | None = None):
        tok = tok or self.tok
        return ParseError(msg, tok.line, tok.col)

    def take(self, kind: str) -> _Tok:
        tok = self.tok
        if tok.kind != kind:
            want = {"ident": "variable", "eof": "end of input"}.get(kind, repr(kind))
            got = tok.text or "end of input"
            raise self.error(f"expected {want}, found {got!r}")
        self.i += 1
        return tok

    def parse(self) -> Formula:
        f = self.iff()
        self.take("eof")
        return f

    def iff(self) -> Formula:
        f = self.imp()
        while self.tok.kind == "iff":
            self.i += 1
            f = Iff(f, self.imp())
        return f

    def imp(self) -> Formula:
        f = self.disj()
        if self.tok.kind == "imp":
            self.i += 1
            return Implies(f, self.imp())
        return f

    def disj(self) -> Formula:
        f = self.conj()
        while self.tok.kind == "|":
            self.i += 1
            f = Or(f, self.conj())
        return f

    def conj(self) -> Formula:
        f = self.unary()
        while self.tok.kind == "&":
            self.i += 1
            f = And(f, self.unary())
        return f

    def unary(self) -> Formula:
        if self.tok.kind == "!":
            self.i += 1
            return Not(self.unary())
        if self.tok.kind == "(":
            self.i += 1
            f = self.iff()
            self.take(")")
            return f
        return Atom(self.atom())

    def atom(self) -> Literal:
        x = self.take("ident").text
        if self.tok.kind == "neq":
            self.i += 1
            return Neq(x, self.take("ident").text)
        self.take("=")
        if self.tok.kind == "zero":
            self.i += 1
            return Diff(x, x, x)
        if self.tok.kind == "ident" and self.peek().kind == "(":
            name_tok = self.take("ident")
            name = name_tok.text
            if name not in self.arities:
                raise self.error(f"unknown operator {name!r}", name_tok)
            self.take("(")
            args = [self.take("ident").text]
            while self.tok.kind == ",":
                self.i += 1
                args.append(self.take("ident").text)
            self.take(")")
            if len(args) != self.arities[name]:
                raise self.error(
                    f"arity mismatch: {name} takes {self.arities[name]} argument(s), got {len(args)}",
                    name_tok)
            return Op(x, name, tuple(args))
        y = self.take("ident").text
        # "U" is both the union keyword and a legal variable name; it acts as
        # the keyword only when another variable follows it.
        if self.tok.kind == "ident" and self.tok.text == "U" and self.peek().kind == "ident":
            self.i += 1
            return Union(x, y, self.take("ident").text)
        if self.tok.kind == "\\":
            self.i += 1
            return Diff(x, y, self.take("ident").text)
        return Union(x, y, y)


def parse(text: str, arities: Mapping[str, int] | None = None) -> Formula:
    """Parse ``text``; ``arities`` maps operator names to arity (built-ins by default)."""
    return _Parser(text, BUILTIN_ARITIES if arities is None else arities).parse()


# ---------------------------------------------------------------------------
# Printing

_PREC = {Iff: 1, Implies: 2, Or: 3, And: 4}
_SYM = {Iff: "<->", Implies: "->", Or: "|", And: "&"}


def to_text(f: Formula) -> str:
    if isinstance(f, Atom):
        return str(f.lit)
    if isinstance(f, Not):
        inner = to_text(f.f)
        return f"!{inner}" if isinstance(f.f, (Atom, Not)) else f"!({inner})"
    prec = _PREC[type(f)]

    def side(g: Formula, right: bool) -> str:
        s = to_text(g)
        if isinstance(g, _BINARY):
            p = _PREC[type(g)]
            # -> associates to the right, the others to the left
            same_side_ok = right if isinstance(f, Implies) else not right
            if p < prec or (p == prec and not same_side_ok):
                return f"({s})"
        return s

    return f"{side(f.left, False)} {_SYM[type(f)]} {side(f.right, True)}"


# ---------------------------------------------------------------------------
# Normalization


@dataclass(frozen=True)
class NormalizedConjunction:
    literals: tuple[Literal, ...]
    fresh_vars: frozenset[str] = frozenset()
    vars: frozenset[str] = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "literals", tuple(self.literals))
        object.__setattr__(
            self, "vars",
            frozenset(v for lit in self.literals for v in literal_vars(lit)))

    def op_literals(self) -> list[Op]:
        return [lit for lit in self.literals if isinstance(lit, Op)]

    def operators(self) -> frozenset[str]:
        return frozenset(lit.op for lit in self.op_literals())

    def __str__(self):
        return " & ".join(str(lit) for lit in self.literals)


def conjunction(*lits: Literal | str) -> NormalizedConjunction:
    """Build a conjunction from literals or atom strings (test/REPL convenience)."""
    out: list[Literal] = []
    for lit in lits:
        if isinstance(lit, str):
            f = parse(lit)
            if not isinstance(f, Atom):
                raise ValueError(f"not a single atom: {lit!r}")
            lit = f.lit
        out.append(lit)
    return NormalizedConjunction(tuple(out))


class _Fresh:
    def __init__(self, taken: Iterable[str]):
        self.taken = set(taken)
        self.counter = itertools.count()
        self.memo: dict[Literal, str] = {}

    def for_literal(self, lit: Literal) -> str:
        if lit not in self.memo:
            while True:
                name = f"_w{next(self.counter)}"
                if name not in self.taken:
                    break
            self.taken.add(name)
            self.memo[lit] = name
        return self.memo[lit]


def _nnf(f: Formula, positive: bool = True):
    """Negation normal form as nested ('and'|'or', l, r) / ('lit', lit, sign) tuples."""
    if isinstance(f, Atom):
        return ("lit", f.lit, positive)
    if isinstance(f, Not):
        return _nnf(f.f, not positive)
    if isinstance(f, And):
        return ("and" if positive else "or", _nnf(f.left, positive), _nnf(f.right, positive))
    if isinstance(f, Or):
        return ("or" if positive else "and", _nnf(f.left, positive), _nnf(f.right, positive))
    if isinstance(f, Implies):
        return _nnf(Or(Not(f.left), f.right), positive)
    if isinstance(f, Iff):
        both = Or(And(f.left, f.right), And(Not(f.left), Not(f.right)))
        return _nnf(both, positive)
    raise TypeError(f"not a formula: {f!r}")


def _dnf(node) -> list[frozenset]:
    kind = node[0]
    if kind == "lit":
        return [frozenset([(node[1], node[2])])]
    left, right = _dnf(node[1]), _dnf(node[2])
    if kind == "or":
        return left + right
    return [a | b for a in left for b in right]


def _clean(clauses: Iterable[frozenset]) -> list[frozenset]:
    seen: dict[frozenset, None] = {}
    for cl in clauses:
        if any((lit, not sign) in cl for lit, sign in cl):
            continue
        seen.setdefault(cl, None)
    kept = list(seen)
    # drop clauses subsumed by a strictly smaller one
    return [c for c in kept if not any(d < c for d in kept)]


def _eval_skeleton(f: Formula, truth: Mapping[Literal, bool]) -> bool:
    if isinstance(f, Atom):
        return truth[f.lit]
    if isinstance(f, Not):
        return not _eval_skeleton(f.f, truth)
    a, b = _eval_skeleton(f.left, truth), _eval_skeleton(f.right, truth)
    if isinstance(f, And):
        return a and b
    if isinstance(f, Or):
        return a or b
    if isinstance(f, Implies):
        return (not a) or b
    return a == b


def _enumerate_clauses(f: Formula, atoms: Sequence[Literal]) -> list[frozenset]:
    out = []
    for bits in itertools.product((True, False), repeat=len(atoms)):
        truth = dict(zip(atoms, bits))
        if _eval_skeleton(f, truth):
            out.append(frozenset(truth.items()))
    return out


def _positive_literals(clause: frozenset, fresh: _Fresh) -> tuple[list[Literal], set[str]]:
    lits: list[Literal] = []
    new: set[str] = set()
    for lit, sign in sorted(clause, key=lambda p: (str(p[0]), p[1])):
        if sign:
            lits.append(lit)
        elif isinstance(lit, Neq):
            lits.append(Union(lit.x, lit.y, lit.y))
        else:
            w = fresh.for_literal(lit)
            new.add(w)
            if isinstance(lit, Union):
                lits.append(Union(w, lit.y, lit.z))
            elif isinstance(lit, Diff):
                lits.append(Diff(w, lit.y, lit.z))
            else:
                lits.append(Op(w, lit.op, lit.args))
            lits.append(Neq(lit.x, w))
    deduped = list(dict.fromkeys(lits))
    return deduped, new


def normalize(f: Formula, backend: str = "dnf") -> list[NormalizedConjunction]:
    """Equisatisfiable list of conjunctions of positive literals.

    ``backend`` is ``"dnf"`` (NNF then distribution) or ``"enumerate"``
    (truth assignments over the atoms).  The DNF route falls back to the
    enumerator if it would produce more than ``2**atoms`` conjunctions.
    """
    atoms = list(dict.fromkeys(_atoms(f)))
    if backend == "dnf":
        clauses = _clean(_dnf(_nnf(f)))
        if len(clauses) > 2 ** len(atoms):
            clauses = _clean(_enumerate_clauses(f, atoms))
    elif backend == "enumerate":
        clauses = _clean(_enumerate_clauses(f, atoms))
    else:
        raise ValueError(f"unknown normalization backend {backend!r}")
    fresh = _Fresh(free_vars(f))
    out = []
    for cl in clauses:
        lits, new = _positive_literals(cl, fresh)
        out.append(NormalizedConjunction(tuple(lits), frozenset(new)))
    return out
