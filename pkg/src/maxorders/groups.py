"""Virtually free-abelian groups given as extension data.

An element is a pair (n, f) with n in Z^k and f in a finite quotient; the
product is (n, f)(m, g) = (n + σ_f m + c(f, g), fg).
"""

from __future__ import annotations

import ast
import itertools
import re
from dataclasses import dataclass, field
from typing import Optional

from . import lattice as L

__all__ = [
    "FiniteQuotientTable",
    "ExtensionData",
    "GroupElement",
    "Validation",
    "GroupVerdict",
    "validate_extension",
    "torsion_in_coset",
    "delta_plus_trivial",
    "dihedral_free",
    "change_basis",
    "parse_group",
    "GroupSyntaxError",
    "trivial_extension",
    "abelian_invariants",
    "format_abelian",
    "format_group",
]


@dataclass(frozen=True)
class FiniteQuotientTable:
    names: tuple
    table: tuple  # table[i][j] = index of names[i]*names[j]
    identity: int = 0

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "table", tuple(tuple(r) for r in self.table))

    @property
    def size(self) -> int:
        return len(self.names)

    def mul(self, i: int, j: int) -> int:
        return self.table[i][j]

    def index(self, name: str) -> int:
        return self.names.index(name)

    def inverse(self, i: int) -> int:
        for j in range(self.size):
            if self.table[i][j] == self.identity:
                return j
        raise ValueError(f"{self.names[i]} has no inverse")

    def power(self, i: int, m: int) -> int:
        out = self.identity
        for _ in range(m):
            out = self.mul(i, out)
        return out

    def order(self, i: int) -> int:
        x, m = i, 1
        while x != self.identity:
            x = self.mul(i, x)
            m += 1
            if m > self.size:
                raise ValueError("table is not a group")
        return m

    def problems(self) -> list:
        n, e, t = self.size, self.identity, self.table
        out = []
        if len(t) != n or any(len(r) != n for r in t):
            return ["table is not square"]
        if any(not (0 <= x < n) for r in t for x in r):
            return ["table entry out of range"]
        for i in range(n):
            if t[e][i] != i or t[i][e] != i:
                out.append(f"identity law fails at {self.names[i]}")
            if e not in t[i]:
                out.append(f"{self.names[i]} has no inverse")
        for i, j, k in itertools.product(range(n), repeat=3):
            if t[t[i][j]][k] != t[i][t[j][k]]:
                out.append(f"associativity fails at ({self.names[i]},{self.names[j]},{self.names[k]})")
                break
        return out

    @classmethod
    def trivial(cls):
        return cls(("e",), ((0,),), 0)

    @classmethod
    def cyclic(cls, m: int, prefix: str = "t"):
        names = ["e"] + [f"{prefix}{i}" if m > 2 else prefix for i in range(1, m)]
        return cls(tuple(names), tuple(tuple((i + j) % m for j in range(m)) for i in range(m)), 0)


@dataclass(frozen=True)
class GroupElement:
    coset: int
    vector: tuple

    def to_json(self, e: Optional["ExtensionData"] = None):
        name = e.quotient.names[self.coset] if e is not None else self.coset
        return {"coset": name, "vector": list(self.vector)}


@dataclass(frozen=True)
class ExtensionData:
    rank: int
    quotient: FiniteQuotientTable
    action: tuple  # per quotient element, a k x k integer matrix acting on columns
    cocycle: dict = field(default_factory=dict)  # (f, g) -> vector; missing = 0
    name: str = "G"

    def __post_init__(self):
        object.__setattr__(self, "action", tuple(tuple(tuple(r) for r in m) for m in self.action))
        coc = {k: tuple(v) for k, v in self.cocycle.items() if any(v)}
        object.__setattr__(self, "cocycle", coc)

    def __hash__(self):
        return hash((self.rank, self.quotient, self.action, tuple(sorted(self.cocycle.items()))))

    def c(self, f: int, g: int) -> tuple:
        return self.cocycle.get((f, g), (0,) * self.rank)

    def sigma(self, f: int):
        return self.action[f]

    def identity_element(self) -> GroupElement:
        return GroupElement(self.quotient.identity, (0,) * self.rank)

    def multiply(self, x: GroupElement, y: GroupElement) -> GroupElement:
        v = L.vadd(L.vadd(x.vector, L.matvec(self.sigma(x.coset), y.vector)), self.c(x.coset, y.coset))
        return GroupElement(self.quotient.mul(x.coset, y.coset), v)

    def power(self, x: GroupElement, m: int) -> GroupElement:
        out = self.identity_element()
        for _ in range(m):
            out = self.multiply(x, out)
        return out

    def is_identity(self, x: GroupElement) -> bool:
        return x.coset == self.quotient.identity and not any(x.vector)


def trivial_extension(rank: int, quotient: Optional[FiniteQuotientTable] = None) -> ExtensionData:
    q = quotient or FiniteQuotientTable.trivial()
    return ExtensionData(rank, q, tuple(L.identity(rank) for _ in range(q.size)), {})


@dataclass(frozen=True)
class Validation:
    ok: bool
    violation: str = ""
    indices: tuple = ()

    def __bool__(self):
        return self.ok

    def to_json(self):
        return {"ok": self.ok, "violation": self.violation or None, "indices": list(self.indices)}


def validate_extension(e: ExtensionData) -> Validation:
    """Check group table, σ_e = I, σ_f σ_g = σ_fg, invertibility, the
    normalization of c and the cocycle identity.  Reports the first failure."""
    q = e.quotient
    probs = q.problems()
    if probs:
        return Validation(False, probs[0])
    if len(e.action) != q.size:
        return Validation(False, "one action matrix per quotient element is required")
    k = e.rank
    ident = L.identity(k)
    for f, m in enumerate(e.action):
        if len(m) != k or any(len(r) != k for r in m):
            return Validation(False, f"action {q.names[f]} is not {k}x{k}", (f,))
        if abs(L.det(m)) != 1:
            return Validation(False, f"action {q.names[f]} is not invertible over Z", (f,))
    if [list(r) for r in e.sigma(q.identity)] != ident:
        return Validation(False, "action of the identity is not I", (q.identity,))
    for (f, g), v in e.cocycle.items():
        if not (0 <= f < q.size and 0 <= g < q.size) or len(v) != k:
            return Validation(False, "malformed cocycle entry", (f, g))
    for f, g in itertools.product(range(q.size), repeat=2):
        if L.matmul(e.sigma(f), e.sigma(g)) != [list(r) for r in e.sigma(q.mul(f, g))]:
            return Validation(False, f"σ_{q.names[f]} σ_{q.names[g]} != σ_{q.names[q.mul(f, g)]}", (f, g))
    for f in range(q.size):
        if any(e.c(q.identity, f)) or any(e.c(f, q.identity)):
            return Validation(False, f"cocycle not normalized at {q.names[f]}", (f,))
    for f, g, h in itertools.product(range(q.size), repeat=3):
        lhs = L.vadd(e.c(f, g), e.c(q.mul(f, g), h))
        rhs = L.vadd(L.matvec(e.sigma(f), e.c(g, h)), e.c(f, q.mul(g, h)))
        if lhs != rhs:
            return Validation(
                False,
                f"cocycle identity fails at ({q.names[f]},{q.names[g]},{q.names[h]})",
                (f, g, h),
            )
    return Validation(True)


def torsion_in_coset(e: ExtensionData, f: int, m: int) -> L.AffineSolutionSet:
    """All n with (n, f)^m = 1, as an affine lattice.

    (n, f)^m is affine in n: its linear part is Σ_{i<m} σ_f^i and its constant
    part is the power of (0, f), so this is one integer linear system.
    """
    q = e.quotient
    if q.power(f, m) != q.identity:
        return L.AffineSolutionSet(None, ())
    k = e.rank
    const = e.power(GroupElement(f, (0,) * k), m).vector
    lin = L.zeros(k, k)
    p = L.identity(k)
    for _ in range(m):
        lin = [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(lin, p)]
        p = L.matmul(e.sigma(f), p)
    return L.solve_integer(lin, [-x for x in const])


@dataclass(frozen=True)
class GroupVerdict:
    value: bool
    witness: Optional[GroupElement] = None
    detail: str = ""
    axis: Optional[tuple] = None

    def __bool__(self):
        return self.value

    def to_json(self, e: Optional[ExtensionData] = None):
        out = {"value": self.value, "witness": self.witness.to_json(e) if self.witness else None}
        if self.axis is not None:
            out["axis"] = list(self.axis)
        if self.detail:
            out["detail"] = self.detail
        return out


def delta_plus_trivial(e: ExtensionData) -> GroupVerdict:
    """Δ⁺(G) = 1 iff no coset f ≠ e with σ_f = I contains a torsion element.

    N-conjugates of t = (n, f) are (n + (1 - σ_f)a, f), finitely many exactly
    when σ_f = I, and N is torsion free, so these cosets are the only places
    a nontrivial finite-conjugacy torsion element can live.
    """
    q = e.quotient
    ident = [list(r) for r in L.identity(e.rank)]
    for f in range(q.size):
        if f == q.identity or [list(r) for r in e.sigma(f)] != ident:
            continue
        sol = torsion_in_coset(e, f, q.order(f))
        if sol.feasible:
            t = GroupElement(f, tuple(sol.particular))
            return GroupVerdict(False, t, f"torsion element of order {q.order(f)} with trivial action")
    return GroupVerdict(True, None, "no torsion in cosets acting trivially")


def dihedral_free(e: ExtensionData) -> GroupVerdict:
    """Decide dihedral-freeness.

    An infinite dihedral subgroup is ⟨a, t⟩ with t = (n, f) of order 2 and
    σ_f(a) = -a.  Its normalizer has finite index iff (1 - σ_f)(N) has rank
    at most one, so the search runs over quotient involutions and one linear
    system each.
    """
    q = e.quotient
    k = e.rank
    for f in range(q.size):
        if f == q.identity or q.order(f) != 2:
            continue
        s = e.sigma(f)
        axes = L.eigen_lattice(s, -1)
        if not axes:
            continue
        one_minus = [[int(i == j) - s[i][j] for j in range(k)] for i in range(k)]
        if L.image_rank(one_minus) > 1:
            continue
        sol = torsion_in_coset(e, f, 2)
        if sol.feasible:
            t = GroupElement(f, tuple(sol.particular))
            return GroupVerdict(False, t, "involution inverting an axis with rank(1-σ) <= 1", tuple(axes[0]))
    return GroupVerdict(True, None, "no involution normalizes an infinite dihedral subgroup of finite index")


def change_basis(e: ExtensionData, u) -> ExtensionData:
    """The same group in coordinates n' = u n (u unimodular)."""
    uinv = L.inverse_unimodular(u)
    action = tuple(L.matmul(L.matmul(u, m), uinv) for m in e.action)
    coc = {k: L.matvec(u, v) for k, v in e.cocycle.items()}
    return ExtensionData(e.rank, e.quotient, action, coc, e.name)


# -- file format -------------------------------------------------------------

class GroupSyntaxError(ValueError):
    def __init__(self, message, line):
        super().__init__(f"line {line}: {message}")
        self.line = line


_PRODUCT = re.compile(r"^(\S+)\*(\S+)=(\S+)$")


def parse_group(text: str) -> ExtensionData:
    """Parse the extension file format.  A missing action means the identity
    matrix; a missing cocycle entry means zero."""
    name, k = None, None
    names = None
    entries = {}
    actions = {}
    cocycle = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(":")
        words = head.split()
        if line.startswith("group"):
            parts = line.split()
            if len(parts) != 4 or parts[2] != "rank":
                raise GroupSyntaxError("expected 'group <name> rank <k>'", lineno)
            name, k = parts[1], int(parts[3])
        elif words == ["quotient"]:
            names = rest.split()
            if len(set(names)) != len(names) or not names:
                raise GroupSyntaxError("quotient names must be unique and nonempty", lineno)
        elif words == ["table"]:
            if names is None:
                raise GroupSyntaxError("'table' before 'quotient'", lineno)
            for tok in rest.split():
                m = _PRODUCT.match(tok)
                if not m or any(x not in names for x in m.groups()):
                    raise GroupSyntaxError(f"bad table entry {tok!r}", lineno)
                a, b, c = (names.index(x) for x in m.groups())
                entries[(a, b)] = c
        elif words and words[0] == "action" and len(words) == 2:
            if names is None or words[1] not in names:
                raise GroupSyntaxError(f"unknown quotient element {words[1]!r}", lineno)
            try:
                mat = ast.literal_eval(rest.strip())
            except (ValueError, SyntaxError):
                raise GroupSyntaxError("action must be a nested integer list", lineno) from None
            if k is None or len(mat) != k or any(len(r) != k for r in mat):
                raise GroupSyntaxError(f"action must be {k}x{k}", lineno)
            actions[names.index(words[1])] = tuple(tuple(int(x) for x in r) for r in mat)
        elif words and words[0] == "cocycle" and len(words) == 3:
            if names is None or any(w not in names for w in words[1:]):
                raise GroupSyntaxError("unknown quotient element in cocycle", lineno)
            vec = tuple(int(x) for x in rest.split())
            if k is None or len(vec) != k:
                raise GroupSyntaxError(f"cocycle needs {k} entries", lineno)
            cocycle[(names.index(words[1]), names.index(words[2]))] = vec
        else:
            raise GroupSyntaxError(f"cannot parse {line!r}", lineno)
    if k is None or names is None:
        raise GroupSyntaxError("missing 'group' header or 'quotient' line", 1)
    n = len(names)
    table = []
    for a in range(n):
        row = []
        for b in range(n):
            if (a, b) not in entries:
                raise GroupSyntaxError(f"table lacks {names[a]}*{names[b]}", 1)
            row.append(entries[(a, b)])
        table.append(row)
    ident = next((i for i in range(n) if all(table[i][j] == j for j in range(n))), 0)
    q = FiniteQuotientTable(tuple(names), tuple(map(tuple, table)), ident)
    action = tuple(actions.get(f, tuple(map(tuple, L.identity(k)))) for f in range(n))
    return ExtensionData(k, q, action, cocycle, name)


def format_group(e: ExtensionData) -> str:
    q = e.quotient
    lines = [f"group {e.name} rank {e.rank}", "quotient: " + " ".join(q.names)]
    for a in range(q.size):
        lines.append("table: " + " ".join(f"{q.names[a]}*{q.names[b]}={q.names[q.mul(a, b)]}" for b in range(q.size)))
    ident = tuple(map(tuple, L.identity(e.rank)))
    for f in range(q.size):
        if e.action[f] != ident:
            lines.append(f"action {q.names[f]}: " + str([list(r) for r in e.action[f]]).replace(" ", ""))
    for (f, g), v in sorted(e.cocycle.items()):
        lines.append(f"cocycle {q.names[f]} {q.names[g]}: " + " ".join(map(str, v)))
    return "\n".join(lines) + "\n"


def abelian_invariants(e: ExtensionData):
    """Invariants ``(free_rank, torsion)`` of G when G is abelian (trivial
    action, abelian quotient, symmetric cocycle), else None.

    G is presented on a basis of N and one generator t_f per f ≠ e, with
    relations t_f + t_g = t_fg + c(f, g); the Smith form gives the answer.
    """
    q = e.quotient
    k = e.rank
    ident = tuple(map(tuple, L.identity(k)))
    if any(m != ident for m in e.action):
        return None
    for f, g in itertools.product(range(q.size), repeat=2):
        if q.mul(f, g) != q.mul(g, f) or e.c(f, g) != e.c(g, f):
            return None
    others = [f for f in range(q.size) if f != q.identity]
    col = {f: k + i for i, f in enumerate(others)}
    rows = []
    for f, g in itertools.product(others, repeat=2):
        r = [0] * (k + len(others))
        for a, x in enumerate(e.c(f, g)):
            r[a] -= x
        r[col[f]] += 1
        r[col[g]] += 1
        h = q.mul(f, g)
        if h != q.identity:
            r[col[h]] -= 1
        rows.append(r)
    ncols = k + len(others)
    if not rows:
        return ncols, []
    d = L.diagonal(L.smith(rows)[0])
    nonzero = [x for x in d if x]
    return ncols - len(nonzero), [x for x in nonzero if x > 1]


def format_abelian(inv) -> str:
    free, tors = inv
    parts = (["Z"] if free == 1 else [f"Z^{free}"] if free else []) + [f"Z{t}" for t in tors]
    return " x ".join(parts) or "1"
