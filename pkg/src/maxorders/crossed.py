"""Crossed systems: a monoid S written as a finite union of cosets B·w_i
over an abelian base B that every w_i normalizes.

Vectors of gr(B) are kept in the local coordinates of ``base.lattice``.  A
group element is a :class:`~maxorders.groups.GroupElement` ``(n, f)`` meaning
``n · w_root(f)``, where ``root(f)`` is the first transversal word in the
class f of G/N.
"""

from __future__ import annotations

import itertools
import os
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

from . import lattice as L
from .affine import AffineMonoid, FacePrime, is_maximal_order, member, minimal_primes, spectrum
from .groups import (
    ExtensionData,
    FiniteQuotientTable,
    GroupElement,
    delta_plus_trivial,
    dihedral_free,
    validate_extension,
)
from .presentations import (
    Presentation,
    RewriteSystem,
    complete,
    enumerate_elements,
    normal_form,
)
from .status import (
    REFUTED,
    UNKNOWN,
    VERIFIED,
    Check,
    SearchBoundExceeded,
    combine,
    refuted,
    unknown,
    verified,
)

__all__ = [
    "CrossedSystem",
    "CrossedSystemError",
    "CommutativityFailure",
    "NormalityFailure",
    "CoverageFailure",
    "StructuralError",
    "MonomialMatrix",
    "RepReport",
    "OrbitDecomposition",
    "Theorem33Report",
    "extract_crossed_system",
    "verify_monomial_rep",
    "parse_monomial_rep",
    "group_extension_of",
    "prime_action_orbits",
    "separation_certificates",
    "invariance_condition",
    "minimal_primes_of_S",
    "transport_certificates",
    "find_escape",
    "maximality_check",
    "dimension_report",
    "theorem33_report",
]


class CrossedSystemError(ValueError):
    def __init__(self, message, word=None):
        super().__init__(message)
        self.word = word


class CommutativityFailure(CrossedSystemError):
    pass


class NormalityFailure(CrossedSystemError):
    pass


class CoverageFailure(CrossedSystemError):
    pass


class StructuralError(CrossedSystemError):
    pass


def _vadd(*vs):
    out = vs[0]
    for v in vs[1:]:
        out = tuple(a + b for a, b in zip(out, v))
    return out


@dataclass(eq=False)
class CrossedSystem:
    rs: RewriteSystem
    base: AffineMonoid
    base_words: tuple  # one word per base generator
    transversal: tuple  # words, transversal[0] == ()
    action: tuple  # per transversal word, k x k matrix on local coordinates
    permutations: tuple  # per transversal word, generator permutation or None
    product_table: dict  # (i, j) -> (local vector, k)
    classes: tuple  # N-class of each transversal word
    offsets: tuple  # w_i = offsets[i] · w_root(classes[i])
    roots: tuple  # first transversal index of each class
    decompositions: dict  # normal form -> tuple of (local vector, i)
    check_len: int
    coverage: str = "full"

    @property
    def presentation(self) -> Presentation:
        return self.rs.presentation

    @property
    def k(self) -> int:
        return self.base.rank

    @property
    def n_classes(self) -> int:
        return len(self.roots)

    def format_word(self, w) -> str:
        return self.rs.format(w)

    def generator_vector(self, g: int) -> tuple:
        return self.base.local_generators[g]

    def in_B(self, n) -> bool:
        key = tuple(n)
        cache = self.__dict__.setdefault("_b_cache", {})
        if key not in cache:
            cache[key] = bool(member(self.base, self.base.ambient(key)))
        return cache[key]

    def in_S(self, g: GroupElement) -> bool:
        """S-membership of (n, f): some transversal word w_k of class f has
        n - offset_k in B."""
        return any(
            self.in_B(L.vsub(g.vector, self.offsets[i]))
            for i in range(len(self.transversal)) if self.classes[i] == g.coset
        )

    def in_N_minus_B(self, g: GroupElement) -> bool:
        return g.coset == 0 and not self.in_B(g.vector)

    def transversal_element(self, i: int) -> GroupElement:
        return GroupElement(self.classes[i], self.offsets[i])

    def base_element(self, n) -> GroupElement:
        return GroupElement(0, tuple(n))

    def element(self, word) -> GroupElement:
        """Group element of a word, from its decomposition b·w_i (or by
        multiplying the letters when the normal form is beyond check_len)."""
        nf = normal_form(self.rs, self.rs.word(word))
        if nf in self.decompositions:
            b, i = self.decompositions[nf][0]
            return GroupElement(self.classes[i], _vadd(b, self.offsets[i]))
        if len(nf) <= 1:
            raise CoverageFailure(f"word {self.format_word(nf)} has no decomposition", nf)
        e = self.extension
        out = e.identity_element()
        for a in nf:
            out = e.multiply(out, self.element((a,)))
        return out

    @cached_property
    def extension(self) -> ExtensionData:
        return group_extension_of(self)

    @cached_property
    def monoid_generators(self) -> tuple:
        """Group elements generating S (the letters) or, for a submonoid
        system, the base generators together with the transversal words."""
        if self.coverage == "full":
            return tuple(self.element((a,)) for a in range(len(self.presentation.generators)))
        gens = [self.base_element(g) for g in self.base.local_generators]
        gens += [self.transversal_element(i) for i in range(1, len(self.transversal))]
        return tuple(gens)

    def sigma(self, i: int, n) -> tuple:
        return L.matvec(self.action[i], n)

    def to_json(self) -> dict:
        fmt = self.format_word
        return {
            "base": {
                "rank": self.k,
                "generators": [
                    {"name": nm, "word": fmt(w), "vector": list(g)}
                    for nm, w, g in zip(self.base.names, self.base_words, self.base.generators)
                ],
            },
            "transversal": [fmt(w) for w in self.transversal],
            "classes": list(self.classes),
            "offsets": [list(self.base.ambient(o)) for o in self.offsets],
            "permutations": [
                None if p is None else [self.base.names[j] for j in p] for p in self.permutations
            ],
            "product_table": [
                {"i": fmt(self.transversal[i]), "j": fmt(self.transversal[j]),
                 "base": list(self.base.ambient(b)), "k": fmt(self.transversal[k])}
                for (i, j), (b, k) in sorted(self.product_table.items())
            ],
            "check_len": self.check_len,
            "coverage": self.coverage,
        }


def _base_elements(rs, base_words, n, max_len):
    """All coefficient vectors whose product word has length <= max_len."""
    lengths = [len(w) for w in base_words]
    if any(x == 0 for x in lengths):
        raise CrossedSystemError("base words must be nonempty")
    out = []

    def rec(i, left, acc):
        if i == n:
            out.append(tuple(acc))
            return
        for lam in range(left // lengths[i] + 1):
            rec(i + 1, left - lam * lengths[i], acc + [lam])

    rec(0, max_len, [])
    return out


def _union_find_offsets(m, k, relations):
    """Classes and offsets from relations w_i = d · w_j (d a local vector)."""
    parent = list(range(m))
    off = [(0,) * k for _ in range(m)]  # w_i = off[i] · w_parent[i]

    def find(i):
        if parent[i] == i:
            return i, (0,) * k
        r, o = find(parent[i])
        parent[i] = r
        off[i] = _vadd(off[i], o)
        return r, off[i]

    for i, j, d in relations:
        ri, oi = find(i)
        rj, oj = find(j)
        # w_i = oi w_ri, w_j = oj w_rj, w_i = d w_j  =>  w_ri = (d + oj - oi) w_rj
        delta = L.vsub(_vadd(d, oj), oi)
        if ri == rj:
            if any(delta):
                raise StructuralError("inconsistent coset merge: a transversal word would be torsion in N")
            continue
        if ri < rj:
            parent[rj] = ri
            off[rj] = tuple(-x for x in delta)
        else:
            parent[ri] = rj
            off[ri] = delta
    roots, classes, offsets = [], [], []
    for i in range(m):
        r, o = find(i)
        if r not in roots:
            roots.append(r)
        classes.append(roots.index(r))
        offsets.append(o)
    return tuple(roots), tuple(classes), tuple(offsets)


def extract_crossed_system(
    rs: RewriteSystem,
    base: AffineMonoid,
    base_words,
    transversal,
    check_len: int = 6,
    coverage: str = "full",
) -> CrossedSystem:
    """Build and check the decomposition S = ∪ B·w_i.

    Verified up to ``check_len``: the base words commute and satisfy exactly
    the relations of ``base`` (same normal form iff same vector), every w_i
    and every letter normalizes B, and (for ``coverage="full"``) every normal
    form of length <= check_len factors as b·w_i.  With
    ``coverage="submonoid"`` the system describes the submonoid generated
    by the base and the transversal, so only closure of the product table
    is required.
    """
    if not rs.confluent:
        raise ValueError("a confluent rewrite system is required")
    p = rs.presentation
    if not p.is_homogeneous():
        raise ValueError("coverage is certified by word length, which needs homogeneous relations")
    if coverage not in ("full", "submonoid"):
        raise ValueError("coverage must be 'full' or 'submonoid'")
    words = tuple(rs.word(w) for w in base_words)
    trans = tuple(rs.word(w) for w in transversal)
    if not trans or trans[0] != ():
        raise CrossedSystemError("the transversal must start with the empty word")
    if len(set(normal_form(rs, w) for w in trans)) != len(trans):
        raise CrossedSystemError("transversal words must be distinct elements")
    n, k = base.n, base.rank
    if len(words) != n:
        raise CrossedSystemError("one word per base generator is required")
    nf = lambda w: normal_form(rs, w)  # noqa: E731
    longest = max(len(w) for w in trans)
    if check_len < 2 * longest + max(len(w) for w in words):
        raise ValueError("check_len is too small to read off the action and product table")

    for i, j in itertools.combinations(range(n), 2):
        if nf(words[i] + words[j]) != nf(words[j] + words[i]):
            raise CommutativityFailure(
                f"base words {base.names[i]} and {base.names[j]} do not commute", words[i] + words[j]
            )

    # the base words realize exactly the monoid ``base`` up to check_len
    local = base.local_generators
    by_nf = {}
    for lam in _base_elements(rs, words, n, check_len):
        w = sum((words[i] * c for i, c in enumerate(lam)), ())
        v = (0,) * k
        for c, g in zip(lam, local):
            if c:
                v = _vadd(v, L.vscale(c, g))
        key = nf(w)
        if key in by_nf and by_nf[key] != v:
            raise StructuralError(
                "base words satisfy a relation the vectors do not: "
                f"{rs.format(key)}", key
            )
        by_nf[key] = v
    by_vec = {}
    for key, v in by_nf.items():
        if v in by_vec and by_vec[v] != key:
            raise StructuralError(
                f"vectors satisfy a relation the base words do not: {rs.format(key)} vs {rs.format(by_vec[v])}",
                key,
            )
        by_vec[v] = key

    decomp = {}
    for v, bw in by_vec.items():
        for i, w in enumerate(trans):
            if len(bw) + len(w) <= check_len:
                decomp.setdefault(nf(bw + w), set()).add((v, i))
    decomp = {key: tuple(sorted(val, key=lambda t: (t[1], t[0]))) for key, val in decomp.items()}

    def conj(w, g_word, label):
        """b with w·g = b·w (normality of w), from the decomposition table."""
        key = nf(w + g_word)
        for i, tw in enumerate(trans):
            if nf(tw) == nf(w):
                cands = [b for b, j in decomp.get(key, ()) if j == i]
                if cands:
                    return cands[0]
        # w not a transversal word: look for b with b·w = w·g directly
        for v, bw in by_vec.items():
            if len(bw) == len(g_word) and nf(bw + w) == key:
                return v
        raise NormalityFailure(f"{label} does not normalize B", w + g_word)

    def matrix_of(images, label):
        rows = []
        gt = [list(g) for g in local]
        for r in range(k):
            sol = L.solve_integer(gt, [img[r] for img in images])
            if not sol.feasible:
                raise StructuralError(f"conjugation by {label} is not linear on gr(B)")
            rows.append(list(sol.particular))
        if any(L.matvec(rows, g) != img for g, img in zip(local, images)):
            raise StructuralError(f"conjugation by {label} is not linear on gr(B)")
        return tuple(tuple(r) for r in rows)

    action, perms = [], []
    for i, w in enumerate(trans):
        images = [conj(w, words[g], rs.format(w)) for g in range(n)]
        action.append(matrix_of(images, rs.format(w)))
        perm = tuple(local.index(img) if img in local else -1 for img in images)
        perms.append(perm if -1 not in perm and len(set(perm)) == n else None)
    if action[0] != tuple(map(tuple, L.identity(k))):
        raise StructuralError("the empty word does not act trivially")
    if coverage == "full":
        for a in range(len(p.generators)):
            for g in range(n):
                conj((a,), words[g], p.names[a])

    if coverage == "full":
        all_nf, _ = enumerate_elements(rs, check_len)
        for s in all_nf:
            if s not in decomp:
                raise CoverageFailure(f"{rs.format(s)} is not of the form b·w_i", s)

    table = {}
    for i, j in itertools.product(range(len(trans)), repeat=2):
        key = nf(trans[i] + trans[j])
        if key not in decomp:
            raise CoverageFailure(
                f"product {rs.format(trans[i])}·{rs.format(trans[j])} is not of the form b·w_k", key
            )
        table[(i, j)] = decomp[key][0]

    rels = []
    for key, opts in decomp.items():
        (b0, i0) = opts[0]
        for b1, i1 in opts[1:]:
            # b0 w_i0 = b1 w_i1  =>  w_i0 = (b1 - b0) w_i1
            rels.append((i0, i1, L.vsub(b1, b0)))
    roots, classes, offsets = _union_find_offsets(len(trans), k, rels)
    for i in range(len(trans)):
        if action[i] != action[roots[classes[i]]]:
            raise StructuralError("transversal words in one N-coset act differently")

    cs = CrossedSystem(
        rs, base, words, trans, tuple(action), tuple(perms), table, classes, offsets, roots,
        decomp, check_len, coverage,
    )
    # S ∩ N = B: words in the identity class must have offsets in B
    for i in range(len(trans)):
        if classes[i] == 0 and not cs.in_B(offsets[i]):
            raise StructuralError(
                f"{rs.format(trans[i])} lies in gr(B) but outside B, so S ∩ gr(B) is larger than B",
                trans[i],
            )
    return cs


# -- group extension -----------------------------------------------------------

def group_extension_of(cs: CrossedSystem) -> ExtensionData:
    """Read G = S S^{-1} off the crossed system: N = gr(B), the quotient is
    the set of N-classes of transversal words, the action is conjugation and
    the cocycle c(f, g) is the N-part of w_f w_g."""
    q = cs.n_classes
    table, coc = [], {}
    for f in range(q):
        row = []
        for g in range(q):
            b, kk = cs.product_table[(cs.roots[f], cs.roots[g])]
            row.append(cs.classes[kk])
            coc[(f, g)] = _vadd(b, cs.offsets[kk])
        table.append(tuple(row))
    names = tuple("e" if f == 0 else cs.format_word(cs.transversal[cs.roots[f]]).replace(" ", "") for f in range(q))
    quotient = FiniteQuotientTable(names, tuple(table), 0)
    action = tuple(cs.action[cs.roots[f]] for f in range(q))
    e = ExtensionData(cs.k, quotient, action, coc, name="G")
    v = validate_extension(e)
    if not v.ok:
        raise StructuralError(f"extension data read off the crossed system is invalid: {v.violation}")
    return e


# -- monomial representations ----------------------------------------------------

@dataclass(frozen=True)
class MonomialMatrix:
    size: int
    perm: tuple  # row i has its nonzero entry in column perm[i]
    entries: tuple  # exponent vector of that entry

    def __post_init__(self):
        object.__setattr__(self, "perm", tuple(self.perm))
        object.__setattr__(self, "entries", tuple(tuple(e) for e in self.entries))
        if sorted(self.perm) != list(range(self.size)) or len(self.entries) != self.size:
            raise ValueError("a monomial matrix needs one entry per row and column")

    def __matmul__(self, other: "MonomialMatrix") -> "MonomialMatrix":
        perm = tuple(other.perm[self.perm[i]] for i in range(self.size))
        ent = tuple(_vadd(self.entries[i], other.entries[self.perm[i]]) for i in range(self.size))
        return MonomialMatrix(self.size, perm, ent)

    @classmethod
    def identity(cls, size: int, rank: int):
        return cls(size, tuple(range(size)), tuple((0,) * rank for _ in range(size)))

    def is_diagonal(self) -> bool:
        return all(p == i for i, p in enumerate(self.perm))


def parse_monomial_rep(text: str, p: Presentation) -> dict:
    """``size n``, ``rank c`` then ``x: col:e1,...,ec ...`` (one entry per
    row, 1-based columns).  Returns generator id -> MonomialMatrix."""
    size = rank = None
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "size" and len(parts) == 2:
            size = int(parts[1])
            continue
        if parts[0] == "rank" and len(parts) == 2:
            rank = int(parts[1])
            continue
        name, _, rest = line.partition(":")
        name = name.strip()
        if name not in p.names or size is None or rank is None:
            raise ValueError(f"line {lineno}: unexpected {line!r}")
        perm, ent = [], []
        for tok in rest.split():
            col, _, exps = tok.partition(":")
            vec = tuple(int(x) for x in exps.split(","))
            if len(vec) != rank:
                raise ValueError(f"line {lineno}: entry {tok!r} needs {rank} exponents")
            perm.append(int(col) - 1)
            ent.append(vec)
        if len(perm) != size:
            raise ValueError(f"line {lineno}: expected {size} entries")
        out[p.index(name)] = MonomialMatrix(size, tuple(perm), tuple(ent))
    missing = [nm for nm in p.names if p.index(nm) not in out]
    if missing:
        raise ValueError(f"no matrix for {', '.join(missing)}")
    return out


def _image(assignment, w, size, rank):
    m = MonomialMatrix.identity(size, rank)
    for a in w:
        m = m @ assignment[a]
    return m


@dataclass(frozen=True)
class RepReport:
    ok: bool
    relation_failures: tuple = ()
    collision: Optional[tuple] = None
    words_checked: int = 0

    def to_json(self):
        return {
            "ok": self.ok,
            "relation_failures": list(self.relation_failures),
            "collision": list(self.collision) if self.collision else None,
            "words_checked": self.words_checked,
        }


def verify_monomial_rep(p: Presentation, assignment: dict, scan_len: int, rs: Optional[RewriteSystem] = None) -> RepReport:
    """Check the defining relations under the matrices, then look for two
    distinct normal forms of length <= scan_len with the same image."""
    mats = list(assignment.values())
    size, rank = mats[0].size, len(mats[0].entries[0])
    if any(m.size != size or len(m.entries[0]) != rank for m in mats):
        raise ValueError("all matrices must have the same size and exponent rank")
    failures = []
    for lhs, rhs in p.relations:
        if _image(assignment, lhs, size, rank) != _image(assignment, rhs, size, rank):
            failures.append(f"{p.format(lhs)} = {p.format(rhs)}")
    if failures:
        return RepReport(False, tuple(failures))
    rs = rs or complete(p)
    words, _ = enumerate_elements(rs, scan_len)
    images = {(): MonomialMatrix.identity(size, rank)}
    seen = {}
    for w in words:
        img = images[w] if w in images else images[w[:-1]] @ assignment[w[-1]]
        images[w] = img
        if img in seen:
            return RepReport(False, (), (rs.format(seen[img]), rs.format(w)), len(images))
        seen[img] = w
    return RepReport(True, (), None, len(words))


def diagonal_entry_rank(assignment: dict, words, entry: int = 0) -> int:
    """Rank of the lattice spanned by one diagonal entry of the images of
    ``words`` (which must map to diagonal matrices)."""
    mats = list(assignment.values())
    size, rank = mats[0].size, len(mats[0].entries[0])
    vecs = []
    for w in words:
        m = _image(assignment, w, size, rank)
        if not m.is_diagonal():
            raise ValueError("word does not map to a diagonal matrix")
        vecs.append(m.entries[entry])
    return L.rank(vecs)


# -- orbits and traces ---------------------------------------------------------

@dataclass(frozen=True)
class OrbitDecomposition:
    primes: tuple  # minimal primes of the base
    prime_permutations: tuple  # per transversal word: prime index -> prime index
    orbits: tuple  # tuples of prime indices
    traces: tuple  # per orbit, tuple of coefficient vectors of generator products

    def to_json(self, cs: CrossedSystem):
        b = cs.base
        return {
            "minimal_primes": [p.label(b) for p in self.primes],
            "orbits": [[self.primes[i].label(b) for i in o] for o in self.orbits],
            "traces": [[b.format(c) for c in t] for t in self.traces],
            "permutations": {
                cs.format_word(w): [self.primes[j].label(b) for j in perm]
                for w, perm in zip(cs.transversal, self.prime_permutations)
            },
        }


def _face_certificate(b: AffineMonoid, prime: FacePrime):
    return prime.certificate


def in_trace(cs: CrossedSystem, orbit_primes, vec) -> bool:
    """Is the base element ``vec`` (local) in the intersection of the primes?"""
    return all(L.dot(p.certificate, vec) > 0 for p in orbit_primes)


def _trace_generators(cs: CrossedSystem, orbit_primes):
    b = cs.base
    n = b.n
    prime_sets = [set(p.generators) for p in orbit_primes]
    hitting = []
    for size in range(1, n + 1):
        for sub in itertools.combinations(range(n), size):
            s = set(sub)
            if all(s & ps for ps in prime_sets) and not any(set(h) <= s for h in hitting):
                hitting.append(sub)
    cands = []
    seen = set()
    for h in hitting:
        coeffs = tuple(int(i in h) for i in range(n))
        v = b.local(b.combination(coeffs))
        if v not in seen:
            seen.add(v)
            cands.append((coeffs, v))
    out = []
    for coeffs, v in cands:
        if not any(v2 != v and cs.in_B(L.vsub(v, v2)) for _, v2 in cands):
            out.append(coeffs)
    return tuple(out)


def prime_action_orbits(cs: CrossedSystem) -> OrbitDecomposition:
    """Permutations of the minimal primes of B induced by the transversal,
    the orbits, and minimal generators of each orbit's intersection."""
    primes = minimal_primes(cs.base)
    faces = [p.face_generators for p in primes]
    perms = []
    for i, gp in enumerate(cs.permutations):
        if gp is None:
            raise StructuralError(
                f"conjugation by {cs.format_word(cs.transversal[i])} does not permute the base generators"
            )
        img = []
        for f in faces:
            moved = frozenset(gp[g] for g in f)
            if moved not in faces:
                raise StructuralError("conjugation does not permute the minimal primes (base not invariant)")
            img.append(faces.index(moved))
        perms.append(tuple(img))
    orbits, seen = [], set()
    for start in range(len(primes)):
        if start in seen:
            continue
        orb, todo = {start}, [start]
        while todo:
            x = todo.pop()
            for perm in perms:
                if perm[x] not in orb:
                    orb.add(perm[x])
                    todo.append(perm[x])
        seen |= orb
        orbits.append(tuple(sorted(orb)))
    traces = tuple(_trace_generators(cs, [primes[i] for i in o]) for o in orbits)
    return OrbitDecomposition(tuple(primes), tuple(perms), tuple(orbits), traces)


# -- separation and invariance ------------------------------------------------

def _central_candidates(cs: CrossedSystem, max_orbits: int = 3):
    """Products over unions of orbits of base generators under the
    transversal actions; these are fixed by every action, hence central."""
    n = cs.base.n
    perms = [p for p in cs.permutations if p is not None]
    seen, gen_orbits = set(), []
    for g in range(n):
        if g in seen:
            continue
        orb, todo = {g}, [g]
        while todo:
            x = todo.pop()
            for p in perms:
                if p[x] not in orb:
                    orb.add(p[x])
                    todo.append(p[x])
        seen |= orb
        gen_orbits.append(orb)
    out = []
    for r in range(1, min(max_orbits, len(gen_orbits)) + 1):
        for combo in itertools.combinations(gen_orbits, r):
            union = set().union(*combo)
            coeffs = tuple(int(i in union) for i in range(n))
            vec = cs.base.local(cs.base.combination(coeffs))
            if all(cs.sigma(i, vec) == vec for i in range(len(cs.transversal))):
                out.append((coeffs, vec))
    return out


def _in_zS(cs: CrossedSystem, g: GroupElement, z) -> bool:
    return cs.in_S(GroupElement(g.coset, L.vsub(g.vector, z)))


def separation_certificates(cs: CrossedSystem, orbits: Optional[OrbitDecomposition] = None, max_power: int = 8) -> dict:
    """(i) a central z in the base lying in every minimal prime, (ii) the
    finite checks b·w·b' ∈ z·S for trace generators of distinct orbits and
    every transversal word, (iii) z^m ∈ x·S for every generator x of S."""
    orbits = orbits or prime_action_orbits(cs)
    b = cs.base
    z = None
    for coeffs, vec in _central_candidates(cs):
        if all(L.dot(p.certificate, vec) > 0 for p in orbits.primes):
            z = (coeffs, vec)
            break
    out = {"central": None, "pairs": [], "power": None}
    if z is None:
        out["status"] = UNKNOWN
        out["detail"] = "no central orbit product lies in every minimal prime"
        return out
    zc, zv = z
    out["central"] = b.format(zc)
    checks = []
    for o1, o2 in itertools.permutations(range(len(orbits.orbits)), 2):
        for t1 in orbits.traces[o1]:
            v1 = b.local(b.combination(t1))
            for t2 in orbits.traces[o2]:
                v2 = b.local(b.combination(t2))
                for i in range(len(cs.transversal)):
                    # b·w_i·b' = (b + σ_i(b')) · w_i
                    g = GroupElement(cs.classes[i], _vadd(v1, cs.sigma(i, v2), cs.offsets[i]))
                    ok = _in_zS(cs, g, zv)
                    checks.append(ok)
                    out["pairs"].append({
                        "b": b.format(t1), "w": cs.format_word(cs.transversal[i]),
                        "b_prime": b.format(t2), "ok": ok,
                    })
    e = cs.extension
    powers = {}
    for gi, x in enumerate(cs.monoid_generators):
        xinv = _inverse(e, x)
        found = None
        for m in range(1, max_power + 1):
            t = e.multiply(xinv, GroupElement(0, L.vscale(m, zv)))
            if cs.in_S(t):
                found = m
                break
        powers[gi] = found
    out["power"] = {str(k): v for k, v in powers.items()}
    if not all(checks):
        out["status"] = UNKNOWN
        out["detail"] = "some b·w·b' is not in z·S"
    elif any(v is None for v in powers.values()):
        out["status"] = UNKNOWN
        out["detail"] = f"no power z^m with m <= {max_power} in x·S for some generator x"
    else:
        out["status"] = VERIFIED
        out["exponent"] = max(powers.values(), default=1)
    out["vacuous"] = len(orbits.orbits) < 2
    return out


def _inverse(e: ExtensionData, x: GroupElement) -> GroupElement:
    q = e.quotient
    finv = q.inverse(x.coset)
    m = L.matvec(e.sigma(finv), _vadd(x.vector, e.c(x.coset, finv)))
    return GroupElement(finv, tuple(-a for a in m))


def _transport(cs: CrossedSystem, orbits: OrbitDecomposition, src: int, dst: int):
    """A pair (w_i, w_j) with σ_i(Q_src) = Q_dst and w_i·w_j in B on the face
    of Q_dst.  Then w_i·Face(Q_src)·w_j lies in Face(Q_dst), so a prime of S
    missing Face(Q_dst) also misses Face(Q_src)."""
    cert = orbits.primes[dst].certificate
    e = cs.extension
    for i, perm in enumerate(orbits.prime_permutations):
        if perm[src] != dst:
            continue
        wi = cs.transversal_element(i)
        for j in range(len(cs.transversal)):
            prod = e.multiply(wi, cs.transversal_element(j))
            if prod.coset == 0 and L.dot(cert, prod.vector) == 0 and cs.in_B(prod.vector):
                return i, j, prod.vector
    return None


def transport_certificates(cs: CrossedSystem, orbits: Optional[OrbitDecomposition] = None):
    """Transport certificates for every ordered pair of distinct primes in
    one orbit.  Returns ``(certificates, missing_pairs)``."""
    orbits = orbits or prime_action_orbits(cs)
    certs, missing = [], []
    b = cs.base
    for orb in orbits.orbits:
        for src, dst in itertools.permutations(orb, 2):
            t = _transport(cs, orbits, src, dst)
            if t is None:
                missing.append((src, dst))
                continue
            i, j, v = t
            certs.append({
                "from": orbits.primes[src].label(b), "to": orbits.primes[dst].label(b),
                "left": cs.format_word(cs.transversal[i]), "right": cs.format_word(cs.transversal[j]),
                "product": list(b.ambient(v)),
            })
    return certs, missing


def invariance_condition(cs: CrossedSystem, orbits: Optional[OrbitDecomposition] = None) -> Check:
    """Certify that every minimal prime of S meets B in a full orbit
    intersection.  Unknown (never Refuted) when a certificate is missing."""
    orbits = orbits or prime_action_orbits(cs)
    certs, missing = transport_certificates(cs, orbits)
    b = cs.base
    if missing:
        src, dst = missing[0]
        return unknown(
            f"no transport certificate from {orbits.primes[src].label(b)} to {orbits.primes[dst].label(b)}",
            pairs_missing=len(missing),
        )
    return verified(f"{len(certs)} transport certificates", certificates=len(certs))


def minimal_primes_of_S(cs: CrossedSystem, orbits: Optional[OrbitDecomposition] = None) -> dict:
    """Minimal primes of S, one per orbit, each described by its trace
    (the orbit intersection), when invariance is certified."""
    orbits = orbits or prime_action_orbits(cs)
    inv = invariance_condition(cs, orbits)
    b = cs.base
    certs, _ = transport_certificates(cs, orbits)
    out = {"status": inv.status, "invariance": inv.to_json(), "certificates": certs}
    if inv.status == VERIFIED:
        out["primes"] = [
            {
                "orbit": [orbits.primes[i].label(b) for i in o],
                "trace": [b.format(c) for c in t],
            }
            for o, t in zip(orbits.orbits, orbits.traces)
        ]
    else:
        out["primes"] = None
    return out


# -- maximality ----------------------------------------------------------------

@dataclass
class Escape:
    witness: GroupElement
    path: tuple  # ("L"|"R", generator label) steps
    element: Optional[GroupElement]
    trivial: bool = False


def find_escape(cs: CrossedSystem, s: GroupElement, radius: int, labels=None):
    """Breadth-first search over products of s with generators of S and s,
    for an element of gr(B) outside B.  Returns the element and the list of
    multiplications, or None when the radius is exhausted."""
    e = cs.extension
    gens = list(cs.monoid_generators) + [s]
    labels = labels or [f"g{i}" for i in range(len(cs.monoid_generators))]
    labels = list(labels) + ["s"]
    if cs.in_N_minus_B(s):
        return s, ()
    seen = {s}
    frontier = [(s, ())]
    for _ in range(radius):
        nxt = []
        for x, path in frontier:
            for g, lab in zip(gens, labels):
                for side, y in (("R", e.multiply(x, g)), ("L", e.multiply(g, x))):
                    if y in seen:
                        continue
                    seen.add(y)
                    step = path + ((side, lab),)
                    if cs.in_N_minus_B(y):
                        return y, step
                    nxt.append((y, step))
        frontier = nxt
    return None


def _generator_labels(cs: CrossedSystem):
    if cs.coverage == "full":
        return list(cs.presentation.names)
    return list(cs.base.names) + [cs.format_word(w) for w in cs.transversal[1:]]


def _maximality_chunk(args):
    cs, witnesses, radius = args
    labels = _generator_labels(cs)
    out = []
    for s in witnesses:
        r = find_escape(cs, s, radius, labels)
        out.append((s, r))
    return out


def maximality_check(cs: CrossedSystem, radius: int = 4, box: int = 2, threads: Optional[int] = None) -> Check:
    """Test maximality of S among submonoids T of G with T ∩ N = B on the
    witnesses x·w_root(f), x in [-box, box]^k local coordinates, x·w ∉ S.

    Every tested witness must generate, together with S, an element of
    gr(B) outside B within ``radius`` multiplications.  The outcome is
    Verified only up to these bounds; an exhausted search gives Unknown with
    the witness as a possible counterexample.
    """
    witnesses = []
    skipped = 0
    for f in range(cs.n_classes):
        for x in itertools.product(range(-box, box + 1), repeat=cs.k):
            s = GroupElement(f, tuple(x))
            if cs.in_S(s):
                skipped += 1
                continue
            witnesses.append(s)
    threads = threads if threads is not None else int(os.environ.get("WORKBENCH_THREADS", "1") or 1)
    if threads > 1 and len(witnesses) > 64:
        from concurrent.futures import ProcessPoolExecutor

        chunks = [witnesses[i::threads] for i in range(threads)]
        with ProcessPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(_maximality_chunk, [(cs, c, radius) for c in chunks]))
        results = sorted((r for part in parts for r in part), key=lambda t: (t[0].coset, t[0].vector))
    else:
        results = _maximality_chunk((cs, witnesses, radius))
    bounds = {"radius": radius, "box": box, "witnesses": len(witnesses), "skipped_in_S": skipped}
    fails = [s for s, r in results if r is None]
    if fails:
        s = fails[0]
        return Check(UNKNOWN, s.to_json(cs.extension), "possible counterexample: no escape within the radius", dict(bounds, failures=len(fails)))
    depth = max((len(r[1]) for _, r in results), default=0)
    bounds["max_escape_depth"] = depth
    return Check(VERIFIED, None, "verified up to bounds", bounds)


# -- reports ---------------------------------------------------------------------

def dimension_report(cs: CrossedSystem) -> dict:
    sp = spectrum(cs.base)
    out = {"dim_S": sp.dim, "lattice_rank": sp.lattice_rank, "unit_rank": sp.unit_rank}
    if sp.unit_rank == 0:
        out["clKdim"] = sp.dim
        out["plinth_length"] = 0
    else:
        out["clKdim"] = f"{sp.dim} + pl(U(S)) [pl not computed]"
        out["plinth_length"] = None
    return out


CONDITIONS = ("base_normal", "acc", "delta_plus", "dihedral_free", "invariance", "s_maximal")


@dataclass
class Theorem33Report:
    conditions: dict  # name -> Check
    verdict: str
    extras: dict = field(default_factory=dict)

    @property
    def status(self) -> str:
        return combine(self.conditions.values())

    def to_json(self):
        return {
            "conditions": {k: self.conditions[k].to_json() for k in CONDITIONS if k in self.conditions},
            "status": self.status,
            "verdict": self.verdict,
            **self.extras,
        }


VERDICT_YES = "prime Noetherian maximal order"
VERDICT_NO = "not a prime Noetherian maximal order"
VERDICT_UNKNOWN = "undetermined"


def _guard(fn):
    try:
        return fn()
    except SearchBoundExceeded as exc:
        return unknown(str(exc))


def theorem33_report(cs: CrossedSystem, radius: int = 4, box: int = 2, threads: Optional[int] = None) -> Theorem33Report:
    cond = {}

    def base_normal():
        r = is_maximal_order(cs.base)
        return verified("B = gr(B) ∩ cone(B)") if r else refuted(list(r.witness), "normalization is larger than B")

    cond["base_normal"] = _guard(base_normal)
    bound = {"check_len": cs.check_len} if cs.coverage == "full" else {}
    cond["acc"] = verified("finitely generated base and finite transversal", **bound)
    e = cs.extension

    def dp():
        r = delta_plus_trivial(e)
        return verified(r.detail) if r else refuted(r.witness.to_json(e), r.detail)

    def df():
        r = dihedral_free(e)
        return verified(r.detail) if r else refuted({"t": r.witness.to_json(e), "axis": list(r.axis)}, r.detail)

    cond["delta_plus"] = dp()
    cond["dihedral_free"] = df()
    orbits = None

    def inv():
        nonlocal orbits
        orbits = prime_action_orbits(cs)
        return invariance_condition(cs, orbits)

    cond["invariance"] = _guard(inv)
    if cond["base_normal"].status == VERIFIED:
        cond["s_maximal"] = _guard(lambda: maximality_check(cs, radius, box, threads))
    else:
        cond["s_maximal"] = unknown("maximality test needs a normal base")
    status = combine(cond.values())
    verdict = {VERIFIED: VERDICT_YES, REFUTED: VERDICT_NO}.get(status, VERDICT_UNKNOWN)
    extras = {"dimension": dimension_report(cs)}
    if orbits is not None:
        extras["orbits"] = orbits.to_json(cs)
    return Theorem33Report(cond, verdict, extras)
