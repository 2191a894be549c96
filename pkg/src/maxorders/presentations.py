"""Monomial presentations, string rewriting and normal forms.

Words are tuples of generator ids.  The term order is deglex: shorter words
are smaller, and words of equal length compare lexicographically with the
generators ranked in declaration order (or by an explicit ``order:`` line).

    >>> p = parse_presentation("generators: x y\\nrelations:\\n  y x = x y\\n")
    >>> rs = complete(p)
    >>> rs.rules
    (((1, 0), (0, 1)),)
    >>> rs.format(normal_form(rs, (1, 1, 0)))
    'x y y'
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

Word = tuple  # tuple[int, ...]

__all__ = [
    "Generator",
    "Presentation",
    "RewriteSystem",
    "PresentationSyntaxError",
    "IncompleteCompletion",
    "parse_presentation",
    "is_quadratic_monomial",
    "complete",
    "normal_form",
    "complete_auto",
    "enumerate_elements",
    "deglex_key",
]


def deglex_key(w: Sequence[int], rank=None):
    if rank is None:
        return (len(w), tuple(w))
    return (len(w), tuple(rank[a] for a in w))


class PresentationSyntaxError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column
        self.message = message


@dataclass(frozen=True)
class Generator:
    id: int
    name: str


@dataclass(frozen=True)
class Presentation:
    generators: tuple
    relations: tuple  # tuple of (Word, Word)
    name: str = ""
    order: tuple = ()  # generator ids, smallest first; empty = declaration order

    def __post_init__(self):
        names = [g.name for g in self.generators]
        if len(set(names)) != len(names):
            raise ValueError("generator names must be unique")
        for i, g in enumerate(self.generators):
            if g.id != i:
                raise ValueError("generator ids must be dense and ordered")
            if not g.name or any(c.isspace() for c in g.name):
                raise ValueError(f"bad generator name {g.name!r}")
        n = len(self.generators)
        for lhs, rhs in self.relations:
            if not lhs or not rhs:
                raise ValueError("relation sides must be nonempty")
            if lhs == rhs:
                raise ValueError("relation sides must differ")
            if any(not 0 <= a < n for a in lhs + rhs):
                raise ValueError("relation uses an unknown generator id")
        if self.order and sorted(self.order) != list(range(n)):
            raise ValueError("order must list every generator exactly once")

    @property
    def rank(self) -> tuple:
        """rank[id] = position of the generator in the term order."""
        if not self.order:
            return tuple(range(len(self.generators)))
        r = [0] * len(self.order)
        for pos, a in enumerate(self.order):
            r[a] = pos
        return tuple(r)

    def with_order(self, names) -> "Presentation":
        ids = tuple(self.index(s) if isinstance(s, str) else s for s in names)
        return Presentation(self.generators, self.relations, self.name, ids)

    @classmethod
    def from_names(cls, names: Iterable[str], relations=(), name: str = ""):
        gens = tuple(Generator(i, s) for i, s in enumerate(names))
        p = cls(gens, (), name)
        rels = tuple((p.word(l), p.word(r)) for l, r in relations)
        return cls(gens, rels, name)

    @property
    def names(self) -> tuple:
        return tuple(g.name for g in self.generators)

    def index(self, name: str) -> int:
        for g in self.generators:
            if g.name == name:
                return g.id
        raise KeyError(name)

    def word(self, text) -> Word:
        """Parse ``"x1 x4"``/``"x^2 y"`` (or pass through a tuple of ids)."""
        if isinstance(text, tuple):
            return text
        if isinstance(text, list):
            return tuple(text)
        text = text.strip()
        if text in ("", "1"):
            return ()
        out = []
        for tok in text.split():
            out.extend(_expand_token(tok, self.names, 1, 1))
        return tuple(out)

    def format(self, w: Sequence[int]) -> str:
        if not w:
            return "1"
        return " ".join(self.generators[a].name for a in w)

    def is_homogeneous(self) -> bool:
        return all(len(l) == len(r) for l, r in self.relations)


_TOKEN = re.compile(r"^(?P<name>[^\s^]+)(\^(?P<exp>\d+))?$")


def _expand_token(tok: str, names, line: int, col: int) -> list:
    m = _TOKEN.match(tok)
    if not m:
        raise PresentationSyntaxError(f"malformed token {tok!r}", line, col)
    name = m.group("name")
    exp = int(m.group("exp")) if m.group("exp") is not None else 1
    if name not in names:
        raise PresentationSyntaxError(f"undeclared symbol {name!r}", line, col)
    if exp == 0:
        raise PresentationSyntaxError("exponent must be positive", line, col)
    return [names.index(name)] * exp


def parse_presentation(text: str) -> Presentation:
    """Parse the line-oriented presentation format.

    A relation line may chain several sides (``x^2 = y^2 = z^2``); each
    adjacent pair becomes one relation.
    """
    name = ""
    names = None
    order_names = None
    order_pos = (0, 0)
    relations = []
    in_relations = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        stripped = line.strip()
        if not stripped:
            continue
        col0 = len(line) - len(line.lstrip()) + 1
        head = stripped.split(None, 1)[0]
        if head == "monoid":
            parts = stripped.split()
            if len(parts) != 2:
                raise PresentationSyntaxError("expected 'monoid <name>'", lineno, col0)
            name = parts[1]
            continue
        if stripped.startswith("generators:"):
            if names is not None:
                raise PresentationSyntaxError("generators declared twice", lineno, col0)
            names = []
            rest = line[line.index("generators:") + len("generators:"):]
            offset = line.index("generators:") + len("generators:")
            for m in re.finditer(r"\S+", rest):
                tok = m.group(0)
                col = offset + m.start() + 1
                if "^" in tok or "=" in tok:
                    raise PresentationSyntaxError(f"bad generator name {tok!r}", lineno, col)
                if tok in names:
                    raise PresentationSyntaxError(f"duplicate generator {tok!r}", lineno, col)
                names.append(tok)
            in_relations = False
            continue
        if stripped.startswith("order:"):
            order_names = stripped[len("order:"):].split()
            order_pos = (lineno, col0)
            continue
        if stripped.startswith("relations:"):
            if names is None:
                raise PresentationSyntaxError("relations before generators", lineno, col0)
            in_relations = True
            tail = stripped[len("relations:"):].strip()
            if tail:
                raise PresentationSyntaxError("relations start on the next line", lineno, col0)
            continue
        if not in_relations:
            raise PresentationSyntaxError(f"unexpected text {stripped!r}", lineno, col0)
        relations.extend(_parse_relation_line(line, names, lineno))
    if names is None:
        raise PresentationSyntaxError("missing 'generators:' line", 1, 1)
    gens = tuple(Generator(i, s) for i, s in enumerate(names))
    order = ()
    if order_names is not None:
        if sorted(order_names) != sorted(names):
            raise PresentationSyntaxError("order must list every generator once", *order_pos)
        order = tuple(names.index(s) for s in order_names)
    return Presentation(gens, tuple(relations), name, order)


def _parse_relation_line(line: str, names, lineno: int) -> list:
    sides = []
    pos = 0
    for chunk in line.split("="):
        start = pos
        pos += len(chunk) + 1
        toks = list(re.finditer(r"\S+", chunk))
        if not toks:
            raise PresentationSyntaxError("empty relation side", lineno, start + 1)
        word = []
        for m in toks:
            word.extend(_expand_token(m.group(0), names, lineno, start + m.start() + 1))
        sides.append(tuple(word))
    if len(sides) < 2:
        raise PresentationSyntaxError("relation needs '='", lineno, 1)
    for a, b in zip(sides, sides[1:]):
        if a == b:
            raise PresentationSyntaxError("relation sides are identical", lineno, 1)
    return [(sides[i], sides[i + 1]) for i in range(len(sides) - 1)]


def is_quadratic_monomial(p: Presentation):
    """Return ``(ok, violations)``: every side has length 2 and no length-2
    word occurs in more than one relation side."""
    bad = []
    seen = {}
    for lhs, rhs in p.relations:
        for side in (lhs, rhs):
            if len(side) != 2:
                bad.append(side)
                continue
            seen[side] = seen.get(side, 0) + 1
    bad.extend(w for w, c in sorted(seen.items()) if c > 1)
    return (not bad, bad)


@dataclass(frozen=True)
class RewriteSystem:
    presentation: Presentation
    rules: tuple  # (lhs, rhs) pairs, lhs > rhs, sorted by lhs in the term order
    confluent: bool = True
    _index: dict = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        rank = self.presentation.rank
        for lhs, rhs in self.rules:
            if deglex_key(lhs, rank) <= deglex_key(rhs, rank):
                raise ValueError(f"rule {lhs}->{rhs} is not decreasing")
        object.__setattr__(self, "_index", _index(self.rules))

    @property
    def rank(self) -> tuple:
        return self.presentation.rank

    @property
    def max_lhs(self) -> int:
        return max((len(l) for l, _ in self.rules), default=0)

    def key(self, w):
        return deglex_key(w, self.presentation.rank)

    def format(self, w) -> str:
        return self.presentation.format(w)

    def word(self, text) -> Word:
        return self.presentation.word(text)


class IncompleteCompletion(RuntimeError):
    """Completion stopped at a resource bound.  The partial rules are sound
    consequences of the relations but not known to be confluent."""

    def __init__(self, reason: str, rules, pair):
        super().__init__(reason)
        self.reason = reason
        self.rules = tuple(rules)
        self.pair = pair


def _index(rules) -> dict:
    idx = {}
    for lhs, rhs in rules:
        idx.setdefault(lhs[-1], []).append((lhs, rhs))
    return idx


def _reduce(w: Word, idx: dict) -> Word:
    # left-to-right stack rewriting: only left sides ending at the newest
    # letter can match
    out = []
    todo = list(reversed(w))
    while todo:
        out.append(todo.pop())
        for lhs, rhs in idx.get(out[-1], ()):
            n = len(lhs)
            if len(out) >= n and tuple(out[-n:]) == lhs:
                del out[-n:]
                todo.extend(reversed(rhs))
                break
    return tuple(out)


def _critical_words(l1: Word, l2: Word):
    """(word, position of l2 in word) for proper overlaps of l1 with l2 and
    for occurrences of l2 inside l1; l1 always sits at position 0."""
    n1, n2 = len(l1), len(l2)
    for k in range(1, min(n1, n2)):
        if l1[n1 - k:] == l2[:k]:
            yield l1 + l2[k:], n1 - k
    if n2 <= n1:
        for i in range(n1 - n2 + 1):
            if l1[i:i + n2] == l2 and not (i == 0 and n1 == n2):
                yield l1, i


class _Completion:
    def __init__(self, rank, max_rules, max_len):
        self.rank = rank
        self.max_rules = max_rules
        self.max_len = max_len
        self.rules = {}
        self.idx = {}

    def key(self, w):
        return deglex_key(w, self.rank)

    def orient(self, a, b):
        return (a, b) if self.key(a) > self.key(b) else (b, a)

    def canonical(self):
        return tuple(sorted(self.rules.items(), key=lambda lr: self.key(lr[0])))

    def reduce(self, w):
        return _reduce(w, self.idx)

    def add(self, a, b) -> bool:
        a, b = self.reduce(a), self.reduce(b)
        if a == b:
            return False
        lhs, rhs = self.orient(a, b)
        if len(lhs) > self.max_len:
            raise IncompleteCompletion(f"rule longer than {self.max_len}", self.canonical(), (a, b))
        self.rules[lhs] = rhs
        self.interreduce()
        if len(self.rules) > self.max_rules:
            raise IncompleteCompletion(f"more than {self.max_rules} rules", self.canonical(), (a, b))
        return True

    def interreduce(self):
        changed = True
        while changed:
            changed = False
            self.idx = _index(self.rules.items())
            for lhs in sorted(self.rules, key=self.key, reverse=True):
                rhs = self.rules.pop(lhs)
                self.idx = _index(self.rules.items())
                new_l, new_r = self.reduce(lhs), self.reduce(rhs)
                if new_l != lhs:
                    changed = True
                    if new_l != new_r:
                        a, b = self.orient(new_l, new_r)
                        self.rules[a] = b
                else:
                    self.rules[lhs] = new_r
                    changed |= new_r != rhs
                if changed:
                    break
        self.idx = _index(self.rules.items())


def complete(p: Presentation, max_rules: int = 500, max_len: int = 20) -> RewriteSystem:
    """Knuth-Bendix completion in the presentation's deglex order.

    On success the result is the unique reduced confluent system for the
    congruence, so it does not depend on the order pairs were processed in.
    Raises :class:`IncompleteCompletion` when more than ``max_rules`` rules
    or a left side longer than ``max_len`` would be needed.
    """
    if max_rules < 1 or max_len < 1:
        raise ValueError("bounds must be positive")
    kb = _Completion(p.rank, max_rules, max_len)
    for a, b in p.relations:
        kb.add(a, b)
    checked = set()
    while True:
        todo = [
            (r1, r2)
            for r1 in kb.canonical()
            for r2 in kb.canonical()
            if (r1, r2) not in checked
        ]
        if not todo:
            break
        for r1, r2 in todo:
            if kb.rules.get(r1[0]) != r1[1] or kb.rules.get(r2[0]) != r2[1]:
                continue
            checked.add((r1, r2))
            for word, pos in _critical_words(r1[0], r2[0]):
                left = r1[1] + word[len(r1[0]):]
                right = word[:pos] + r2[1] + word[pos + len(r2[0]):]
                kb.add(left, right)
    return RewriteSystem(p, kb.canonical(), True)


def complete_auto(p: Presentation, max_rules: int = 200, max_len: int = 12) -> RewriteSystem:
    """Try the declared order first, then every other generator order
    (lexicographically), returning the first finite completion."""
    import itertools

    n = len(p.generators)
    first = p.order or tuple(range(n))
    orders = [first] + [o for o in itertools.permutations(range(n)) if o != first]
    last = None
    for order in orders:
        try:
            return complete(Presentation(p.generators, p.relations, p.name, order), max_rules, max_len)
        except IncompleteCompletion as exc:
            last = exc
    raise last


def normal_form(rs: RewriteSystem, w) -> Word:
    if not rs.confluent:
        raise ValueError("normal forms need a confluent system")
    return _reduce(rs.word(w), rs._index)


def enumerate_elements(rs: RewriteSystem, max_len: int):
    """Normal forms of length <= max_len in deglex order, and the number of
    them of each length (the growth function)."""
    n = len(rs.presentation.generators)
    letters = sorted(range(n), key=lambda a: rs.rank[a])
    layer = [()]
    words = [()]
    counts = [1]
    for _ in range(max_len):
        nxt = []
        for w in layer:
            for a in letters:
                u = w + (a,)
                if _suffix_irreducible(rs, u):
                    nxt.append(u)
        words.extend(nxt)
        counts.append(len(nxt))
        layer = nxt
    return words, counts


def _suffix_irreducible(rs: RewriteSystem, u: Word) -> bool:
    # prefixes of u are irreducible already
    for lhs, _ in rs._index.get(u[-1], ()):
        n = len(lhs)
        if len(u) >= n and u[-n:] == lhs:
            return False
    return True
