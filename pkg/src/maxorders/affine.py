"""Affine monoids: finitely generated submonoids of Z^r.

Everything is computed in coordinates of a lattice basis of gr(B), where the
cone of B is full dimensional.  Primes are represented by the faces they
are complementary to; the ideals themselves are never materialized.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import floor, gcd
from typing import Optional

from . import lattice as L
from .status import SearchBoundExceeded

__all__ = [
    "AffineMonoid",
    "MembershipCertificate",
    "NotMember",
    "FacePrime",
    "SpectrumPoset",
    "NormalityResult",
    "cone_hrep",
    "member",
    "unit_group",
    "minimal_primes",
    "spectrum",
    "is_maximal_order",
    "hilbert_basis",
    "free_intersection_basis",
    "parse_affine",
    "AffineSyntaxError",
]

DEFAULT_MAX_NODES = 200_000


def cone_hrep(vectors, dim: int):
    """H-representation of the cone spanned by integer vectors.

    Returns ``(equations, inequalities)``: the cone is
    ``{x : e.x = 0 for e in equations, f.x >= 0 for f in inequalities}``.
    Inequalities are primitive facet normals lying in the span of the cone.
    """
    vecs = [tuple(v) for v in vectors if any(v)]
    if not vecs:
        return [tuple(r) for r in L.identity(dim)], []
    eqs = L.kernel_basis([list(v) for v in vecs], dim)
    k = dim - len(eqs)
    facets = set()
    for subset in itertools.combinations(range(len(vecs)), k - 1):
        rows = [list(vecs[i]) for i in subset] + [list(e) for e in eqs]
        if rows and L.rank(rows) != dim - 1:
            continue
        ker = L.kernel_basis(rows, dim) if rows else [tuple(r) for r in L.identity(dim)]
        if len(ker) != 1:
            continue
        y = L.primitive(ker[0])
        vals = [L.dot(y, v) for v in vecs]
        if all(x >= 0 for x in vals):
            facets.add(y)
        elif all(x <= 0 for x in vals):
            facets.add(tuple(-a for a in y))
    # a facet normal must vanish on a (k-1)-dimensional set of generators
    out = []
    for y in facets:
        on = [v for v in vecs if L.dot(y, v) == 0]
        if any(L.dot(y, v) > 0 for v in vecs) and L.rank(on + [list(e) for e in eqs] or [[0] * dim]) == dim - 1:
            out.append(y)
    return eqs, sorted(out)


def in_cone(hrep, x) -> bool:
    eqs, ineqs = hrep
    return all(L.dot(e, x) == 0 for e in eqs) and all(L.dot(f, x) >= 0 for f in ineqs)


@dataclass(frozen=True)
class MembershipCertificate:
    coefficients: tuple

    def to_json(self):
        return {"member": True, "coefficients": list(self.coefficients)}

    def __bool__(self):
        return True


@dataclass(frozen=True)
class NotMember:
    reason: str

    def to_json(self):
        return {"member": False, "reason": self.reason}

    def __bool__(self):
        return False


@dataclass(frozen=True)
class AffineMonoid:
    ambient_rank: int
    generators: tuple
    names: tuple = ()
    name: str = "B"

    def __post_init__(self):
        gens = tuple(tuple(int(x) for x in g) for g in self.generators)
        object.__setattr__(self, "generators", gens)
        if not gens:
            raise ValueError("an affine monoid needs at least one generator")
        if any(len(g) != self.ambient_rank for g in gens):
            raise ValueError("generator length differs from the ambient rank")
        names = tuple(self.names) or tuple(f"g{i + 1}" for i in range(len(gens)))
        if len(names) != len(gens) or len(set(names)) != len(names):
            raise ValueError("generator names must be unique, one per generator")
        object.__setattr__(self, "names", names)

    @property
    def n(self) -> int:
        return len(self.generators)

    @cached_property
    def lattice(self) -> list:
        """Row-HNF basis of gr(B) in ambient coordinates."""
        return L.lattice_basis(self.generators)

    @property
    def rank(self) -> int:
        return len(self.lattice)

    def local(self, v) -> Optional[tuple]:
        """Coordinates of an ambient vector in the gr(B) basis (None if the
        vector is not in gr(B))."""
        if len(v) != self.ambient_rank:
            raise ValueError("vector has the wrong length")
        return L.coordinates(self.lattice, v)

    def ambient(self, c) -> tuple:
        out = [0] * self.ambient_rank
        for ci, row in zip(c, self.lattice):
            if ci:
                out = [a + ci * b for a, b in zip(out, row)]
        return tuple(out)

    @cached_property
    def local_generators(self) -> list:
        return [self.local(g) for g in self.generators]

    @cached_property
    def facets(self) -> list:
        """Primitive inequalities of cone(B) in local coordinates."""
        return cone_hrep(self.local_generators, self.rank)[1]

    @cached_property
    def unit_indices(self) -> tuple:
        """Generators in the lineality space of the cone (exactly the units
        among the generators)."""
        return tuple(
            i for i, g in enumerate(self.local_generators)
            if all(L.dot(f, g) == 0 for f in self.facets)
        )

    def combination(self, coefficients) -> tuple:
        out = [0] * self.ambient_rank
        for c, g in zip(coefficients, self.generators):
            if c:
                out = [a + c * b for a, b in zip(out, g)]
        return tuple(out)

    def element(self, word_or_coeffs) -> tuple:
        """Vector of a product given as a dict name->exponent or a
        coefficient sequence."""
        if isinstance(word_or_coeffs, dict):
            coeffs = [word_or_coeffs.get(nm, 0) for nm in self.names]
            return self.combination(coeffs)
        return self.combination(word_or_coeffs)

    def format(self, coefficients) -> str:
        parts = []
        for nm, c in zip(self.names, coefficients):
            if c == 1:
                parts.append(nm)
            elif c:
                parts.append(f"{nm}^{c}")
        return "*".join(parts) or "1"

    @cached_property
    def _search(self):
        return _MembershipSearch(self)


class _MembershipSearch:
    """Branch and bound over nonnegative coefficient vectors.

    Non-unit generators are processed in decreasing order of a grading
    functional that is positive on them and zero on units, which bounds every
    coefficient.  Each node is pruned by the cone and the lattice spanned by
    the generators still available; units are absorbed at the leaf by a
    lattice test, then made nonnegative with a positive unit relation.
    """

    def __init__(self, b: AffineMonoid):
        k = b.rank
        self.b = b
        self.grading = tuple(sum(col) for col in zip(*b.facets)) if b.facets else (0,) * k
        units = list(b.unit_indices)
        nonunits = [i for i in range(b.n) if i not in units]
        nonunits.sort(key=lambda i: (-L.dot(self.grading, b.local_generators[i]), i))
        self.units = units
        self.nonunits = nonunits
        ug = [b.local_generators[i] for i in units]
        self.unit_lattice = L.lattice_basis(ug)
        self.suffix_cone = []
        self.suffix_lattice = []
        for start in range(len(nonunits) + 1):
            vecs = [b.local_generators[i] for i in nonunits[start:]] + ug + [L.vscale(-1, u) for u in ug]
            self.suffix_cone.append(cone_hrep(vecs, k))
            self.suffix_lattice.append(L.lattice_basis(vecs))
        self._relation = None

    def unit_relation(self, max_nodes=None):
        """Coefficients rho >= 1 on the unit generators with sum rho_i u_i = 0."""
        if self._relation is None:
            ug = [self.b.local_generators[i] for i in self.units]
            rho = [0] * len(ug)
            for j, u in enumerate(ug):
                found = _positive_combination(ug, L.vscale(-1, u))
                if found is None:
                    raise SearchBoundExceeded("no nonnegative unit relation found")
                nu, den = found
                nu[j] += den
                rho = [a + c for a, c in zip(rho, nu)]
            self._relation = rho
        return self._relation

    def run(self, target, max_nodes):
        b = self.b
        m = len(self.nonunits)
        failed = set()
        nodes = [0]

        def dfs(i, rem):
            nodes[0] += 1
            if nodes[0] > max_nodes:
                raise SearchBoundExceeded(f"membership search exceeded {max_nodes} nodes")
            if (i, rem) in failed:
                return None
            if not in_cone(self.suffix_cone[i], rem) or not L.in_lattice(self.suffix_lattice[i], rem):
                failed.add((i, rem))
                return None
            if i == m:
                return []
            g = b.local_generators[self.nonunits[i]]
            lg = L.dot(self.grading, g)
            top = L.dot(self.grading, rem) // lg
            for lam in range(top, -1, -1):
                res = dfs(i + 1, tuple(x - lam * y for x, y in zip(rem, g)))
                if res is not None:
                    return [lam] + res
            failed.add((i, rem))
            return None

        found = dfs(0, tuple(target))
        if found is None:
            return None
        coeffs = [0] * b.n
        rem = tuple(target)
        for lam, i in zip(found, self.nonunits):
            coeffs[i] = lam
            rem = L.vsub(rem, L.vscale(lam, b.local_generators[i]))
        if self.units:
            ug = [b.local_generators[i] for i in self.units]
            mu = L.solve_integer(L.transpose(ug), list(rem)).particular
            if any(x < 0 for x in mu):
                rho = self.unit_relation(max_nodes)
                t = max(-floor(Fraction(x, r)) for x, r in zip(mu, rho))
                mu = [x + t * r for x, r in zip(mu, rho)]
            for x, i in zip(mu, self.units):
                coeffs[i] = x
        return tuple(coeffs)


def _positive_combination(units, target):
    """Nonnegative integers nu and d >= 1 with sum nu_i u_i = d·target.

    The units span a linear space, so its cone is covered by the simplicial
    cones of independent r-subsets and one of them contains the target."""
    basis = L.lattice_basis(units)
    r = len(basis)
    coords = [L.coordinates(basis, u) for u in units]
    t = L.coordinates(basis, target)
    for sub in itertools.combinations(range(len(units)), r):
        cols = [coords[i] for i in sub]
        if L.rank(cols) != r:
            continue
        q = L.solve_rational(L.transpose(cols, r), t)
        if q is None or any(x < 0 for x in q):
            continue
        den = 1
        for x in q:
            den = den * x.denominator // gcd(den, x.denominator)
        nu = [0] * len(units)
        for i, x in zip(sub, q):
            nu[i] += int(x * den)
        return nu, den
    return None


def member(b: AffineMonoid, v, max_nodes: int = DEFAULT_MAX_NODES):
    """Decide ``v ∈ B``.

    Returns a :class:`MembershipCertificate` (coefficients re-summing to v)
    or a :class:`NotMember` refusal.  Raises SearchBoundExceeded when the
    branch and bound runs out of nodes; a refusal is only returned after an
    exhaustive search.
    """
    c = b.local(tuple(v))
    if c is None:
        return NotMember("not in gr(B)")
    for f in b.facets:
        if L.dot(f, c) < 0:
            return NotMember(f"violates cone inequality {list(f)}")
    coeffs = b._search.run(c, max_nodes)
    if coeffs is None:
        return NotMember("exhaustive search found no representation")
    if b.combination(coeffs) != tuple(v):
        raise AssertionError("membership certificate does not re-sum")
    return MembershipCertificate(coeffs)


def unit_group(b: AffineMonoid, max_nodes: int = DEFAULT_MAX_NODES) -> list:
    """Basis (ambient coordinates) of U(B), generated by the generators whose
    negatives lie in B."""
    units = [g for g in b.generators if member(b, L.vscale(-1, g), max_nodes)]
    return L.lattice_basis(units)


@dataclass(frozen=True)
class FacePrime:
    """The prime ``B \\ <face>``; the face is given by generator indices."""

    face_generators: frozenset
    n: int
    certificate: tuple = ()  # functional >= 0 on B, zero exactly on the face

    @property
    def generators(self) -> tuple:
        """Indices of the generators lying in the prime."""
        return tuple(i for i in range(self.n) if i not in self.face_generators)

    def contains(self, b: AffineMonoid, v) -> bool:
        """Is the element v of B in this prime?"""
        c = b.local(v)
        return L.dot(self.certificate, c) > 0

    def label(self, b: AffineMonoid) -> str:
        return "(" + ",".join(b.names[i] for i in self.generators) + ")"

    def to_json(self, b: Optional[AffineMonoid] = None):
        if b is None:
            return {"generators": list(self.generators), "face": sorted(self.face_generators)}
        return {
            "generators": [b.names[i] for i in self.generators],
            "face": [b.names[i] for i in sorted(self.face_generators)],
        }


def _prime_sort_key(p: FacePrime):
    return (len(p.generators), p.generators)


def minimal_primes(b: AffineMonoid) -> list:
    """Complements of the maximal proper faces, i.e. of the facets of cone(B).

    Each prime carries its facet normal as certificate: it is nonnegative on
    every generator and vanishes exactly on the face, so the face is
    divisor-closed.
    """
    out = []
    for f in b.facets:
        face = frozenset(i for i, g in enumerate(b.local_generators) if L.dot(f, g) == 0)
        out.append(FacePrime(face, b.n, f))
    return sorted(out, key=_prime_sort_key)


@dataclass(frozen=True)
class SpectrumPoset:
    primes: tuple
    order: tuple  # pairs (i, j) with primes[i] strictly inside primes[j]
    heights: tuple
    depths: tuple
    dim: int
    unit_rank: int
    lattice_rank: int

    def to_json(self, b: Optional[AffineMonoid] = None):
        return {
            "dim": self.dim,
            "lattice_rank": self.lattice_rank,
            "unit_rank": self.unit_rank,
            "primes": [
                dict(p.to_json(b), height=h, depth=d)
                for p, h, d in zip(self.primes, self.heights, self.depths)
            ],
            "order": [list(e) for e in self.order],
        }


def spectrum(b: AffineMonoid) -> SpectrumPoset:
    """All primes (complements of proper faces other than B itself), with
    heights and depths from longest chains.  The empty prime is the implicit
    bottom used for heights."""
    full = frozenset(range(b.n))
    facet_sets = {}
    for f in b.facets:
        face = frozenset(i for i, g in enumerate(b.local_generators) if L.dot(f, g) == 0)
        facet_sets.setdefault(face, []).append(f)
    faces = {full: ()}
    frontier = [(face, tuple(fs)) for face, fs in facet_sets.items()]
    while frontier:
        nxt = []
        for face, normals in frontier:
            if face in faces:
                continue
            faces[face] = normals
            for other, fs in facet_sets.items():
                meet = face & other
                if meet not in faces:
                    nxt.append((meet, normals + tuple(fs)))
        frontier = nxt
    primes = []
    for face, normals in faces.items():
        if face == full:
            continue
        cert = tuple(sum(col) for col in zip(*normals))
        primes.append(FacePrime(face, b.n, cert))
    primes.sort(key=_prime_sort_key)
    idx = {p.face_generators: i for i, p in enumerate(primes)}
    order = tuple(
        (idx[p.face_generators], idx[q.face_generators])
        for p in primes for q in primes
        if p.face_generators > q.face_generators
    )
    # longest chains; faces ordered by size give a topological order
    by_size = sorted(range(len(primes)), key=lambda i: -len(primes[i].face_generators))
    below = {j: [i for i, jj in order if jj == j] for j in range(len(primes))}
    above = {i: [j for ii, j in order if ii == i] for i in range(len(primes))}
    heights = [0] * len(primes)
    for j in by_size:
        heights[j] = 1 + max((heights[i] for i in below[j]), default=0)
    depths = [0] * len(primes)
    for i in reversed(by_size):
        depths[i] = max((1 + depths[j] for j in above[i]), default=0)
    dim = max(heights, default=0)
    unit_rank = L.rank([b.local_generators[i] for i in b.unit_indices]) if b.unit_indices else 0
    return SpectrumPoset(tuple(primes), order, tuple(heights), tuple(depths), dim, unit_rank, b.rank)


# -- Hilbert bases -----------------------------------------------------------

def _ray_key(v):
    return (sum(abs(x) for x in v), v)


def _distinct_rays(vecs, idx):
    best = {}
    for i in idx:
        p = L.primitive(vecs[i])
        if p not in best or _ray_key(vecs[i]) < _ray_key(vecs[best[p]]):
            best[p] = i
    return sorted(best.values())


def _triangulate(vecs, idx, dim):
    """Pulling triangulation of cone(vecs[idx]) using the generators as rays."""
    reps = _distinct_rays(vecs, idx)
    r = L.rank([vecs[i] for i in reps])
    if len(reps) == r:
        return [tuple(reps)]
    apex = reps[0]
    _, facets = cone_hrep([vecs[i] for i in reps], dim)
    out = []
    for y in facets:
        if L.dot(y, vecs[apex]) == 0:
            continue
        sub = [i for i in reps if L.dot(y, vecs[i]) == 0]
        for simplex in _triangulate(vecs, sub, dim):
            out.append(tuple(sorted(simplex + (apex,))))
    return sorted(set(out))


def _parallelepiped(rays) -> list:
    """Nonzero lattice points of the half-open fundamental parallelepiped of a
    full-dimensional simplicial cone."""
    d = len(rays)
    v = L.transpose([list(r) for r in rays])  # columns are rays
    dmat, u, _ = L.smith(v)
    uinv = L.inverse_unimodular(u)
    diag = L.diagonal(dmat)
    points = []
    for t in itertools.product(*(range(x) for x in diag)):
        if not any(t):
            continue
        x = L.matvec(uinv, t)
        q = L.solve_rational(v, x)
        p = [Fraction(0)] * d
        for qi, r in zip(q, rays):
            frac = qi - floor(qi)
            if frac:
                p = [a + frac * b for a, b in zip(p, r)]
        points.append(tuple(int(a) for a in p))
    return points


def hilbert_basis(rays, dim: int) -> list:
    """Hilbert basis of ``cone(rays) ∩ Z^dim`` for a pointed cone.

    Triangulates the cone with its generators, collects the lattice points of
    every fundamental parallelepiped and keeps the irreducible ones.
    """
    rays = [tuple(r) for r in rays if any(r)]
    if not rays:
        return []
    w = L.saturation(L.lattice_basis(rays), dim)
    local = [L.coordinates(w, r) for r in rays]
    k = len(w)
    simplices = _triangulate(local, list(range(len(local))), k)
    cands = set()
    for s in simplices:
        rs = [local[i] for i in s]
        cands.update(rs)
        cands.update(_parallelepiped(rs))
    _, facets = cone_hrep(local, k)
    if not facets:
        raise ValueError("cone is not pointed")
    grading = tuple(sum(col) for col in zip(*facets))
    ordered = sorted(cands, key=lambda x: (L.dot(grading, x), x))
    basis = []
    for x in ordered:
        gx = L.dot(grading, x)
        reducible = any(
            L.dot(grading, y) < gx and all(L.dot(f, L.vsub(x, y)) >= 0 for f in facets)
            for y in ordered if y != x
        )
        if not reducible:
            basis.append(x)
    out = []
    for c in basis:
        v = [0] * dim
        for ci, row in zip(c, w):
            v = [a + ci * b for a, b in zip(v, row)]
        out.append(tuple(v))
    return sorted(out)


@dataclass(frozen=True)
class NormalityResult:
    is_maximal_order: bool
    witness: Optional[tuple] = None
    hilbert_basis: tuple = ()

    def __bool__(self):
        return self.is_maximal_order

    def to_json(self):
        out = {"is_maximal_order": self.is_maximal_order, "witness": list(self.witness) if self.witness else None}
        out["hilbert_basis"] = [list(h) for h in self.hilbert_basis]
        return out


def is_maximal_order(b: AffineMonoid, max_nodes: int = DEFAULT_MAX_NODES) -> NormalityResult:
    """Decide whether B = gr(B) ∩ cone(B) (B normal, i.e. an abelian maximal
    order).  On failure the witness lies in the normalization but not in B.
    """
    k = b.rank
    units = [b.local_generators[i] for i in b.unit_indices]
    ubasis = L.lattice_basis(units)
    sat = L.saturation(ubasis, k) if ubasis else []
    for v in sat:
        if not L.in_lattice(ubasis, v):
            return NormalityResult(False, b.ambient(v))
    s = len(sat)
    t = L.complete_basis(sat, k)
    tinv = L.inverse_unimodular(t)

    def project(x):
        return L.matvec(L.transpose(tinv), x)[s:]

    def lift(c):
        full = [0] * s + list(c)
        return L.matvec(L.transpose(t), full)

    pointed = [project(g) for i, g in enumerate(b.local_generators) if i not in b.unit_indices]
    hb = hilbert_basis(pointed, k - s) if pointed else []
    lifted = [b.ambient(lift(h)) for h in hb]
    for v in lifted:
        if not member(b, v, max_nodes):
            return NormalityResult(False, v, tuple(lifted))
    return NormalityResult(True, None, tuple(lifted))


def free_intersection_basis(f_rank: int, sublattice) -> list:
    """Hilbert basis of ``N^f_rank ∩ L`` for a sublattice L given by a basis."""
    basis = [tuple(v) for v in L.lattice_basis(sublattice)]
    if not basis:
        return []
    k = len(basis)
    cols = [tuple(basis[i][j] for i in range(k)) for j in range(f_rank)]
    rays = set()
    for subset in itertools.combinations(range(f_rank), k - 1):
        rows = [list(cols[j]) for j in subset]
        ker = L.kernel_basis(rows, k) if rows else [tuple(r) for r in L.identity(k)]
        if len(ker) != 1:
            continue
        y = L.primitive(ker[0])
        for cand in (y, tuple(-a for a in y)):
            if all(L.dot(c, cand) >= 0 for c in cols):
                rays.add(cand)
    if not rays:
        return []
    hb = hilbert_basis(sorted(rays), k)
    out = []
    for y in hb:
        v = [0] * f_rank
        for yi, row in zip(y, basis):
            v = [a + yi * b for a, b in zip(v, row)]
        out.append(tuple(v))
    return sorted(out)


# -- file format -------------------------------------------------------------

class AffineSyntaxError(ValueError):
    def __init__(self, message, line):
        super().__init__(f"line {line}: {message}")
        self.line = line


_GEN = re.compile(r"^gen\s+(?P<name>\S+?)\s*:\s*(?P<vec>[-\d\s]+?)\s*(=\s*(?P<word>.*))?$")


def parse_affine(text: str):
    """Parse ``affine <name> rank <r>`` followed by ``gen <name>: ints``
    lines, each optionally ending in ``= <word>``.  Returns the monoid and
    the dict of attached words (as strings)."""
    name, rnk = None, None
    names, gens, words = [], [], {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("affine"):
            parts = line.split()
            if len(parts) != 4 or parts[2] != "rank":
                raise AffineSyntaxError("expected 'affine <name> rank <r>'", lineno)
            name = parts[1]
            try:
                rnk = int(parts[3])
            except ValueError:
                raise AffineSyntaxError("rank must be an integer", lineno) from None
            continue
        m = _GEN.match(line)
        if not m:
            raise AffineSyntaxError(f"cannot parse {line!r}", lineno)
        if rnk is None:
            raise AffineSyntaxError("'gen' before 'affine' header", lineno)
        vec = [int(x) for x in m.group("vec").split()]
        if len(vec) != rnk:
            raise AffineSyntaxError(f"expected {rnk} entries, got {len(vec)}", lineno)
        if m.group("name") in names:
            raise AffineSyntaxError(f"duplicate generator {m.group('name')!r}", lineno)
        names.append(m.group("name"))
        gens.append(tuple(vec))
        if m.group("word") is not None:
            words[m.group("name")] = m.group("word").strip()
    if rnk is None or not gens:
        raise AffineSyntaxError("no generators", 1)
    return AffineMonoid(rnk, tuple(gens), tuple(names), name), words
