"""Boolean formulas: parsing, evaluation and exhaustive solution counting.

Basis ordering used everywhere in the package: ``x1`` is the most significant
bit of an assignment index, so index ``0`` is ``00...0`` and index ``2**n - 1``
is ``11...1``.  Path ``p`` of the binary search tree (0-branch leftmost) is
assignment index ``p - 1``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    CapExceededError,
    EmptyClauseError,
    EmptyInputError,
    HeaderError,
    LiteralRangeError,
    ParseError,
    UnbalancedParenError,
    UnknownTokenError,
    UnterminatedClauseError,
)

ENUMERATION_CAP = 24
_CHUNK = 1 << 16

AND, OR, NOT, IMPLIES, IFF = "and", "or", "not", "implies", "iff"
_SYMBOL = {AND: "&", OR: "|", IMPLIES: "->", IFF: "<->"}


@dataclass(frozen=True)
class Var:
    index: int


@dataclass(frozen=True)
class Op:
    """Connective node.  AND/OR may be n-ary; NOT is unary; IMPLIES/IFF binary."""

    kind: str
    args: tuple


def _connectives(node) -> int:
    # an n-ary AND/OR stands for arity-1 binary connectives
    if isinstance(node, Var):
        return 0
    own = 1 if node.kind == NOT else max(len(node.args) - 1, 0)
    return own + sum(_connectives(a) for a in node.args)


def _variables(node, acc: set) -> set:
    if isinstance(node, Var):
        acc.add(node.index)
    else:
        for a in node.args:
            _variables(a, acc)
    return acc


def _eval(node, cols):
    """Evaluate ``node`` on ``cols[i]`` = values of x_{i+1}; works on arrays or bools."""
    if isinstance(node, Var):
        return cols[node.index - 1]
    kind, args = node.kind, node.args
    if kind == NOT:
        return ~_eval(args[0], cols)
    if kind == AND:
        out = _eval(args[0], cols)
        for a in args[1:]:
            out = out & _eval(a, cols)
        return out
    if kind == OR:
        out = _eval(args[0], cols)
        for a in args[1:]:
            out = out | _eval(a, cols)
        return out
    if kind == IMPLIES:
        return ~_eval(args[0], cols) | _eval(args[1], cols)
    if kind == IFF:
        return ~(_eval(args[0], cols) ^ _eval(args[1], cols))
    raise ValueError(f"unknown connective {kind!r}")


def _render(node) -> str:
    if isinstance(node, Var):
        return f"x{node.index}"
    if node.kind == NOT:
        return "!" + _render(node.args[0])
    if len(node.args) == 1:
        return _render(node.args[0])
    return "(" + f" {_SYMBOL[node.kind]} ".join(_render(a) for a in node.args) + ")"


@dataclass(frozen=True, eq=False)
class Formula:
    """Immutable boolean formula over variables ``x1..xn``.

    ``m`` counts binary/unary connectives in the tree.  For formulas read from
    DIMACS, ``num_clauses`` keeps the clause count announced in the header.
    """

    n: int
    root: object
    source: str = ""
    num_clauses: int | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("a formula needs at least one variable")
        bad = [i for i in _variables(self.root, set()) if not 1 <= i <= self.n]
        if bad:
            raise ValueError(f"variable index out of range [1, {self.n}]: {sorted(bad)}")

    @cached_property
    def m(self) -> int:
        return _connectives(self.root)

    def to_expr(self) -> str:
        return _render(self.root)

    def evaluate_indices(self, indices: np.ndarray) -> np.ndarray:
        """Vectorised evaluation over an array of assignment indices."""
        indices = np.asarray(indices, dtype=np.int64)
        shifts = np.arange(self.n - 1, -1, -1, dtype=np.int64)
        cols = ((indices[None, :] >> shifts[:, None]) & 1).astype(bool)
        out = _eval(self.root, cols)
        return np.broadcast_to(out, indices.shape).copy()

    def truth_table(self) -> np.ndarray:
        """Boolean array of length 2**n; entry i is phi(i).  Cached, read-only."""
        return self._table

    @cached_property
    def _table(self) -> np.ndarray:
        if self.n > ENUMERATION_CAP:
            raise CapExceededError(f"n={self.n} exceeds enumeration cap {ENUMERATION_CAP}")
        size = 1 << self.n
        table = np.empty(size, dtype=bool)
        for start in range(0, size, _CHUNK):
            stop = min(start + _CHUNK, size)
            table[start:stop] = self.evaluate_indices(np.arange(start, stop))
        table.setflags(write=False)
        return table

    def __repr__(self):
        return f"Formula(n={self.n}, m={self.m}, expr={self.to_expr()!r})"


@dataclass(frozen=True)
class Assignment:
    bits: tuple

    def __post_init__(self):
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("assignment bits must be 0 or 1")

    @property
    def n(self) -> int:
        return len(self.bits)

    @property
    def index(self) -> int:
        out = 0
        for b in self.bits:
            out = (out << 1) | b
        return out

    @classmethod
    def from_index(cls, index: int, n: int) -> "Assignment":
        if not 0 <= index < (1 << n):
            raise ValueError(f"index {index} out of range for n={n}")
        return cls(tuple((index >> (n - 1 - j)) & 1 for j in range(n)))

    @classmethod
    def from_string(cls, bits: str) -> "Assignment":
        return cls(tuple(int(c) for c in bits))

    def __str__(self):
        return "".join(map(str, self.bits))


@dataclass(frozen=True)
class RangeStats:
    lo: int
    hi: int
    k: int

    @property
    def width(self) -> int:
        return self.hi - self.lo + 1


# --------------------------------------------------------------------------- #
# Parsing
# --------------------------------------------------------------------------- #

def from_clauses(n: int, clauses: Sequence[Sequence[int]], source: str = "") -> Formula:
    """CNF formula from signed-literal clauses (DIMACS convention)."""
    if not clauses:
        raise ValueError("CNF needs at least one clause")
    terms = []
    for clause in clauses:
        lits = [Var(abs(l)) if l > 0 else Op(NOT, (Var(-l),)) for l in clause]
        if not lits:
            raise ValueError("empty clause")
        terms.append(lits[0] if len(lits) == 1 else Op(OR, tuple(lits)))
    root = terms[0] if len(terms) == 1 else Op(AND, tuple(terms))
    return Formula(n, root, source=source, num_clauses=len(clauses))


def parse_dimacs(text: str) -> Formula:
    """Parse DIMACS CNF text.

    Comment lines start with ``c``; a trailing ``%`` line (SATLIB style) ends
    the input.  Clauses may span lines and must be terminated by ``0``.
    """
    n = declared = None
    clauses: list[list[int]] = []
    current: list[int] = []
    current_line = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("%"):
            break
        if line.startswith("p"):
            if n is not None:
                raise HeaderError("duplicate problem line", lineno)
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise HeaderError(f"expected 'p cnf <vars> <clauses>', got {line!r}", lineno)
            try:
                n, declared = int(parts[2]), int(parts[3])
            except ValueError:
                raise HeaderError(f"non-integer header field in {line!r}", lineno) from None
            if n < 1 or declared < 1:
                raise HeaderError("variable and clause counts must be positive", lineno)
            continue
        if n is None:
            raise HeaderError("clause before problem line", lineno)
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise ParseError(f"bad literal {tok!r}", lineno) from None
            if lit == 0:
                if not current:
                    raise EmptyClauseError("empty clause", lineno)
                clauses.append(current)
                current, current_line = [], None
            else:
                if abs(lit) > n:
                    raise LiteralRangeError(f"literal {lit} outside 1..{n}", lineno)
                if current_line is None:
                    current_line = lineno
                current.append(lit)
    if n is None:
        raise HeaderError("missing problem line")
    if current:
        raise UnterminatedClauseError("clause not terminated by 0", current_line)
    if len(clauses) != declared:
        raise HeaderError(f"header declares {declared} clauses, found {len(clauses)}")
    return from_clauses(n, clauses, source=text)


def load_dimacs(path) -> Formula:
    with open(path) as fh:
        f = parse_dimacs(fh.read())
    return Formula(f.n, f.root, source=str(path), num_clauses=f.num_clauses)


_TOKEN = re.compile(r"\s*(?:(<->|↔)|(->|→)|(&|∧)|(\||∨)|(!|~|¬)|(\()|(\))|x(\d+))")
_KINDS = ("iff", "imp", "and", "or", "not", "lp", "rp", "var")


def _tokenize(text: str):
    pos, out = 0, []
    stripped = text.rstrip()
    while pos < len(stripped):
        match = _TOKEN.match(stripped, pos)
        if not match:
            raise UnknownTokenError(f"unknown token at column {pos + 1}: {stripped[pos:pos + 8]!r}")
        for kind, value in zip(_KINDS, match.groups()):
            if value is not None:
                out.append((kind, value, match.start()))
                break
        pos = match.end()
    return out


class _ExprParser:
    # precedence: not > and > or > implies > iff; implies is right-associative

    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos][0] if self.pos < len(self.tokens) else None

    def take(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def parse(self):
        node = self.iff()
        if self.pos != len(self.tokens):
            kind, value, col = self.tokens[self.pos]
            if kind == "rp":
                raise UnbalancedParenError(f"unmatched ')' at column {col + 1}")
            raise ParseError(f"unexpected {value!r} at column {col + 1}")
        return node

    def iff(self):
        node = self.implies()
        while self.peek() == "iff":
            self.take()
            node = Op(IFF, (node, self.implies()))
        return node

    def implies(self):
        node = self.disjunction()
        if self.peek() == "imp":
            self.take()
            return Op(IMPLIES, (node, self.implies()))
        return node

    def disjunction(self):
        node = self.conjunction()
        while self.peek() == "or":
            self.take()
            node = Op(OR, (node, self.conjunction()))
        return node

    def conjunction(self):
        node = self.unary()
        while self.peek() == "and":
            self.take()
            node = Op(AND, (node, self.unary()))
        return node

    def unary(self):
        if self.peek() == "not":
            self.take()
            return Op(NOT, (self.unary(),))
        return self.atom()

    def atom(self):
        kind = self.peek()
        if kind is None:
            raise ParseError("unexpected end of input")
        _, value, col = self.take()
        if kind == "var":
            index = int(value)
            if index < 1:
                raise ParseError(f"variable x{value} at column {col + 1}: indices start at 1")
            return Var(index)
        if kind == "lp":
            node = self.iff()
            if self.peek() != "rp":
                raise UnbalancedParenError(f"'(' at column {col + 1} is never closed")
            self.take()
            return node
        if kind == "rp":
            raise UnbalancedParenError(f"unmatched ')' at column {col + 1}")
        raise ParseError(f"unexpected {value!r} at column {col + 1}")


def parse_expr(text: str, n: int | None = None) -> Formula:
    """Parse an infix formula such as ``"(x1 & x2) | x3"``.

    Tokens: ``&``, ``|``, ``!``, ``->``, ``<->``, ``xN`` and parentheses
    (the Unicode connectives are accepted too).  ``n`` defaults to the largest
    variable index that occurs.
    """
    if not text or not text.strip():
        raise EmptyInputError("empty formula")
    root = _ExprParser(_tokenize(text)).parse()
    used = _variables(root, set())
    width = max(used) if n is None else n
    return Formula(width, root, source=text)


# --------------------------------------------------------------------------- #
# Evaluation and brute force
# --------------------------------------------------------------------------- #

def _bits(a, n: int) -> tuple:
    if isinstance(a, Assignment):
        bits = a.bits
    elif isinstance(a, str):
        bits = tuple(int(c) for c in a)
    else:
        bits = tuple(int(b) for b in a)
    if len(bits) != n:
        raise ValueError(f"assignment has {len(bits)} bits, formula has {n} variables")
    return bits


def evaluate(f: Formula, a) -> int:
    """phi(a) for an Assignment, a bit string like ``"110"``, or a bit sequence."""
    bits = _bits(a, f.n)
    return int(_eval(f.root, np.array(bits, dtype=bool)))


def evaluation_cost(f: Formula, a) -> tuple[int, int]:
    """(leaf reads, connective applications) made while evaluating ``a`` once."""
    bits = np.array(_bits(a, f.n), dtype=bool)
    counts = [0, 0]

    def walk(node):
        if isinstance(node, Var):
            counts[0] += 1
            return bits[node.index - 1]
        vals = [walk(arg) for arg in node.args]
        counts[1] += 1 if node.kind == NOT else len(vals) - 1
        return _eval(Op(node.kind, tuple(Var(i + 1) for i in range(len(vals)))), np.array(vals))

    walk(f.root)
    return counts[0], counts[1]


def _check_range(f: Formula, lo: int, hi: int):
    if not 0 <= lo <= hi <= (1 << f.n) - 1:
        raise ValueError(f"range [{lo}, {hi}] outside [0, {(1 << f.n) - 1}]")


def count_solutions(f: Formula, lo: int, hi: int) -> RangeStats:
    """Exhaustively count satisfying assignments with index in ``[lo, hi]``."""
    _check_range(f, lo, hi)
    if f.n <= ENUMERATION_CAP:
        k = int(np.count_nonzero(f.truth_table()[lo:hi + 1]))
    else:
        k = 0
        for start in range(lo, hi + 1, _CHUNK):
            stop = min(start + _CHUNK, hi + 1)
            k += int(np.count_nonzero(f.evaluate_indices(np.arange(start, stop))))
    return RangeStats(lo, hi, k)


def enumerate_paths(f: Formula, cap: int = ENUMERATION_CAP) -> list[int]:
    """Sorted 1-based tree paths whose leaf satisfies ``f``."""
    if f.n > cap:
        raise CapExceededError(f"n={f.n} exceeds enumeration cap {cap}")
    return (np.flatnonzero(f.truth_table()) + 1).tolist()


def solutions(f: Formula) -> list[Assignment]:
    return [Assignment.from_index(int(i), f.n) for i in np.flatnonzero(f.truth_table())]


# --------------------------------------------------------------------------- #
# Instance generators
# --------------------------------------------------------------------------- #

def planted_formula(n: int, index: int) -> Formula:
    """Conjunction of literals whose only solution is assignment ``index``."""
    a = Assignment.from_index(index, n)
    lits = tuple(Var(j + 1) if b else Op(NOT, (Var(j + 1),)) for j, b in enumerate(a.bits))
    root = lits[0] if n == 1 else Op(AND, lits)
    return Formula(n, root, source=f"planted(n={n}, index={index})")


def random_cnf(n: int, num_clauses: int, width: int = 3, rng=None) -> Formula:
    """Uniform random CNF: each clause has ``min(width, n)`` distinct variables."""
    rng = np.random.default_rng(rng)
    width = min(width, n)
    clauses = []
    for _ in range(num_clauses):
        vars_ = rng.choice(np.arange(1, n + 1), size=width, replace=False)
        signs = rng.choice((-1, 1), size=width)
        clauses.append([int(v * s) for v, s in zip(vars_, signs)])
    return from_clauses(n, clauses, source=f"random_cnf(n={n}, clauses={num_clauses})")


def to_dimacs(n: int, clauses: Iterable[Sequence[int]]) -> str:
    clauses = [list(c) for c in clauses]
    lines = [f"p cnf {n} {len(clauses)}"]
    lines += [" ".join(map(str, c)) + " 0" for c in clauses]
    return "\n".join(lines) + "\n"
