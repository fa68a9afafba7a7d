"""Minimal-support counting.

Three routes live here:

  * a brute-force oracle that enumerates inclusion-minimal satisfying
    subsets behind any monotone evaluator;
  * an image-based enumerator for plain databases (every minimal support
    is the image of some query homomorphism, so inclusion-minimal images
    are exactly the minimal supports) that scales past subset enumeration;
  * the reduct/automorphism partition: per size k, the minimal supports of
    a UCQ split across rigidified reducts, and each reduct's supports are
    counted as homomorphisms divided by its automorphism count.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Callable, Iterable

from .model import (
    ABox,
    Atom,
    CQ,
    Fact,
    RespoError,
    SupportHistogram,
    TBox,
    UCQ,
    UnsupportedTBoxError,
    as_ucq,
)
from .queries import (
    UnsatisfiableQuery,
    canonical_form,
    canonicalize,
    query_hom_exists,
    substitute,
    with_all_pairs_neq,
)
from .reasoner import entails_ground_atom, entails_ucq

Evaluator = Callable[[frozenset[Fact]], bool]


# ---------------------------------------------------------------------------
# Fact databases and homomorphism counting
# ---------------------------------------------------------------------------

class FactDB:
    """Read-only index of a fact set for homomorphism search."""

    def __init__(self, facts: Iterable[Fact]):
        self.facts = tuple(facts)
        self.by_pred: dict[tuple[str, int], list[tuple[str, ...]]] = {}
        self.fact_of: dict[tuple[str, tuple[str, ...]], Fact] = {}
        consts: set[str] = set()
        for f in self.facts:
            self.by_pred.setdefault((f.predicate, len(f.args)), []).append(f.args)
            self.fact_of[(f.predicate, f.args)] = f
            consts.update(f.args)
        self.constants = tuple(sorted(consts))

    def has(self, predicate: str, args: tuple[str, ...]) -> bool:
        return (predicate, args) in self.fact_of


def _search_order(rel: list[Atom]) -> list[Atom]:
    """Most-constrained-first atom ordering: ground/constant-heavy atoms
    first, then repeatedly an atom sharing variables with what is bound."""
    rel = sorted(rel, key=lambda a: (len(a.variables()), repr(a)))
    ordered: list[Atom] = []
    bound: set[str] = set()
    remaining = rel[:]
    while remaining:
        pick = None
        for a in remaining:
            if bound & set(a.variables()) or not a.variables():
                pick = a
                break
        if pick is None:
            pick = remaining[0]
        remaining.remove(pick)
        ordered.append(pick)
        bound |= set(pick.variables())
    return ordered


def _eval_components(cq: CQ) -> list[list[Atom]]:
    """Group atoms by variable connectivity, counting disequalities as
    edges (unlike the query-level component split, which rejects
    cross-component disequalities)."""
    atoms = list(cq.atoms)
    parent = list(range(len(atoms)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    home: dict[str, int] = {}
    for i, atom in enumerate(atoms):
        for v in atom.variables():
            if v in home:
                ri, rj = find(i), find(home[v])
                if ri != rj:
                    parent[rj] = ri
            else:
                home[v] = i
    groups: dict[int, list[Atom]] = {}
    for i, atom in enumerate(atoms):
        groups.setdefault(find(i), []).append(atom)
    return list(groups.values())


def _count_component(atoms: list[Atom], db: FactDB) -> int:
    rel = [a for a in atoms if a.is_relational]
    neqs = [a for a in atoms if not a.is_relational]

    for atom in neqs:
        for t in atom.terms:
            if t.is_var and not any(
                t.name in a.variables() for a in rel
            ):
                raise RespoError(
                    f"disequality variable ?{t.name} occurs in no relational atom"
                )

    # Ground components reduce to membership checks.
    def term_value(t, binding):
        return t.name if t.is_const else binding.get(t.name)

    def neq_ok(binding) -> bool:
        for atom in neqs:
            v1 = term_value(atom.terms[0], binding)
            v2 = term_value(atom.terms[1], binding)
            if v1 is not None and v2 is not None and v1 == v2:
                return False
        return True

    ordered = _search_order(rel)

    def backtrack(i: int, binding: dict[str, str]) -> int:
        if i == len(ordered):
            return 1 if neq_ok(binding) else 0
        atom = ordered[i]
        total = 0
        for args in db.by_pred.get((atom.predicate, len(atom.terms)), ()):
            new = dict(binding)
            ok = True
            for t, value in zip(atom.terms, args):
                if t.is_const:
                    if t.name != value:
                        ok = False
                        break
                else:
                    seen = new.get(t.name)
                    if seen is None:
                        new[t.name] = value
                    elif seen != value:
                        ok = False
                        break
            if ok and neq_ok(new):
                total += backtrack(i + 1, new)
        return total

    return backtrack(0, {})


def count_homomorphisms(cq: CQ, facts: Iterable[Fact] | FactDB) -> int:
    """Number of assignments of cq's variables into the database constants
    satisfying every atom (constants fixed, disequalities as distinctness)."""
    db = facts if isinstance(facts, FactDB) else FactDB(facts)
    total = 1
    for component in _eval_components(cq):
        total *= _count_component(component, db)
        if total == 0:
            return 0
    return total


def cq_holds(cq: CQ, db: FactDB) -> bool:
    return count_homomorphisms(cq, db) > 0


def ucq_holds(ucq: UCQ, facts: Iterable[Fact] | FactDB) -> bool:
    db = facts if isinstance(facts, FactDB) else FactDB(facts)
    return any(cq_holds(d, db) for d in ucq.disjuncts)


# ---------------------------------------------------------------------------
# Subset evaluators
# ---------------------------------------------------------------------------

def make_subset_evaluator(tbox: TBox, query: CQ | UCQ) -> Evaluator:
    """A monotone `subset of facts |= (T, q)` test, choosing the cheapest
    sound route for the TBox flavor."""
    ucq = as_ucq(query)

    if tbox.horn_extended:
        ground = _single_ground_atom(ucq)
        if ground is None:
            raise UnsupportedTBoxError(
                "Horn-extended TBoxes are evaluated on ground atomic queries only"
            )

        def horn_eval(facts: frozenset[Fact]) -> bool:
            abox = ABox(tuple(sorted(facts, key=lambda f: f.label)))
            return entails_ground_atom(abox, tbox, ground)

        return horn_eval

    if not any(not ax.negated for ax in tbox.axioms):
        # Negative axioms affect consistency only; evaluation over the
        # facts themselves is exact.
        def db_eval(facts: frozenset[Fact]) -> bool:
            return ucq_holds(ucq, facts)

        return db_eval

    if any(d.neq_atoms() for d in ucq.disjuncts):
        # Canonical-model matching of disequality queries is not monotone
        # under positive inclusions (a named witness can displace an
        # anonymous one), so minimal supports are not well-behaved.
        raise UnsupportedTBoxError(
            "disequality queries are supported over plain databases only"
        )

    def kb_eval(facts: frozenset[Fact]) -> bool:
        abox = ABox(tuple(sorted(facts, key=lambda f: f.label)))
        return entails_ucq(abox, tbox, ucq)

    return kb_eval


def _single_ground_atom(ucq: UCQ) -> Atom | None:
    if len(ucq.disjuncts) != 1:
        return None
    atoms = ucq.disjuncts[0].atoms
    if len(atoms) != 1 or not atoms[0].is_relational:
        return None
    if any(t.is_var for t in atoms[0].terms):
        return None
    return atoms[0]


# ---------------------------------------------------------------------------
# Brute-force enumeration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MinimalSupport:
    facts: frozenset[Fact]

    def labels(self) -> tuple[str, ...]:
        return tuple(sorted(f.label for f in self.facts))

    def __len__(self) -> int:
        return len(self.facts)


def enumerate_minimal_supports(
    facts: Iterable[Fact],
    evaluator: Evaluator,
    size_cap: int | None = None,
) -> list[MinimalSupport]:
    """All inclusion-minimal satisfying subsets (monotone evaluator), by
    exhaustive subset search.  Exponential; oracle use only.

    For a monotone evaluator, S is minimal iff S satisfies and no single
    deletion does: any satisfying proper subset would survive inside some
    single-deletion subset.
    """
    pool = tuple(facts)
    cap = len(pool) if size_cap is None else min(size_cap, len(pool))
    memo: dict[frozenset[Fact], bool] = {}

    def sat(s: frozenset[Fact]) -> bool:
        if s not in memo:
            memo[s] = evaluator(s)
        return memo[s]

    out: list[MinimalSupport] = []
    for k in range(cap + 1):
        for combo in combinations(pool, k):
            s = frozenset(combo)
            if not sat(s):
                continue
            if all(not sat(s - {f}) for f in s):
                out.append(MinimalSupport(s))
    return out


def count_fms_brute(
    facts: Iterable[Fact], evaluator: Evaluator, size_cap: int | None = None
) -> SupportHistogram:
    supports = enumerate_minimal_supports(facts, evaluator, size_cap)
    return SupportHistogram.from_sizes(len(s) for s in supports)


def minimal_supports_via_hom_images(
    ucq: CQ | UCQ, facts: Iterable[Fact]
) -> list[MinimalSupport]:
    """Minimal supports of a UCQ over a plain database, as the
    inclusion-minimal homomorphism images.  Sound because every minimal
    support is covered exactly by some homomorphism image, and every image
    is a support."""
    ucq = as_ucq(ucq)
    db = FactDB(facts)
    images: set[frozenset[Fact]] = set()
    for disjunct in ucq.disjuncts:
        for image in _hom_images(disjunct, db):
            images.add(image)
    minimal = [
        s for s in images if not any(other < s for other in images)
    ]
    return [MinimalSupport(s) for s in sorted(minimal, key=lambda s: sorted(f.label for f in s))]


def _hom_images(cq: CQ, db: FactDB):
    rel = _search_order(list(cq.relational_atoms()))
    neqs = cq.neq_atoms()

    def assignments(i: int, binding: dict[str, str]):
        if i == len(rel):
            yield dict(binding)
            return
        atom = rel[i]
        for args in db.by_pred.get((atom.predicate, len(atom.terms)), ()):
            new = dict(binding)
            ok = True
            for t, value in zip(atom.terms, args):
                if t.is_const:
                    if t.name != value:
                        ok = False
                        break
                else:
                    seen = new.get(t.name)
                    if seen is None:
                        new[t.name] = value
                    elif seen != value:
                        ok = False
                        break
            if ok:
                yield from assignments(i + 1, new)

    for binding in assignments(0, {}):
        ok = True
        for atom in neqs:
            vals = [
                t.name if t.is_const else binding[t.name] for t in atom.terms
            ]
            if vals[0] == vals[1]:
                ok = False
                break
        if not ok:
            continue
        image = set()
        for atom in rel:
            args = tuple(
                t.name if t.is_const else binding[t.name] for t in atom.terms
            )
            image.add(db.fact_of[(atom.predicate, args)])
        yield frozenset(image)


# ---------------------------------------------------------------------------
# Reducts and counting queries
# ---------------------------------------------------------------------------

def _partitions(items: list[str]):
    """All set partitions, as lists of blocks."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]
        yield [[first]] + part


def ucq_constants(ucq: UCQ) -> tuple[str, ...]:
    out: set[str] = set()
    for d in ucq.disjuncts:
        out.update(d.constants())
    return tuple(sorted(out))


@lru_cache(maxsize=None)
def _all_reducts(ucq: UCQ) -> tuple[CQ, ...]:
    """Every reduct of any disjunct: collapse variable blocks onto a
    representative variable or onto a constant of the union (a support can
    place a variable on any named constant, including one only another
    disjunct mentions), drop duplicate atoms.  Collapses that identify the
    two sides of a disequality are unsatisfiable and skipped."""
    from .model import Term, CONST, var as mkvar

    seen: dict[tuple, CQ] = {}
    consts = ucq_constants(ucq)
    for disjunct in ucq.disjuncts:
        names = list(disjunct.variables())
        for part in _partitions(names):
            targets_per_block = []
            for block in part:
                options: list[Term] = [mkvar(block[0])]
                options.extend(Term(CONST, c) for c in consts)
                targets_per_block.append(options)

            def assign(i: int, mapping: dict[str, Term]):
                if i == len(part):
                    try:
                        reduct = canonicalize(substitute(disjunct, dict(mapping)))
                    except UnsatisfiableQuery:
                        return
                    seen.setdefault(canonical_form(reduct), reduct)
                    return
                for target in targets_per_block[i]:
                    new = dict(mapping)
                    for name in part[i]:
                        new[name] = target
                    assign(i + 1, new)

            assign(0, {})
    return tuple(seen.values())


def reducts(ucq: CQ | UCQ, k: int) -> tuple[CQ, ...]:
    """Reducts with exactly k relational atoms that no smaller reduct maps
    into.  The minimality test targets the disequality-completed form of
    the candidate: that is the shape whose supports are rigid, so a
    smaller reduct mapping into it witnesses a smaller support inside
    every one of its supports."""
    if k < 1:
        raise ValueError("reduct size must be >= 1")
    ucq = as_ucq(ucq)
    everything = _all_reducts(ucq)
    pins = ucq_constants(ucq)
    smaller = [q for q in everything if len(q.relational_atoms()) < k]
    out = []
    for q in everything:
        if len(q.relational_atoms()) != k:
            continue
        rigid = with_all_pairs_neq(q, pins)
        if any(query_hom_exists(small, rigid) for small in smaller):
            continue
        out.append(q)
    return tuple(sorted(out, key=canonical_form))


@dataclass(frozen=True)
class CountingQuery:
    """A rigidified reduct: all-pairs disequalities with coefficient
    gamma = 1 / |Auto|."""

    cq: CQ
    gamma: Fraction


def count_query_homs(src: CQ, dst: CQ) -> int:
    """Number of homomorphisms src -> dst (constants fixed; each source
    disequality must land on a pair dst guarantees distinct)."""
    from .model import Term

    rel = sorted(src.relational_atoms(), key=lambda a: -len(a.variables()))
    neqs = src.neq_atoms()
    dst_atoms = dst.relational_atoms()
    by_pred: dict[tuple[str, str], list[Atom]] = {}
    for atom in dst_atoms:
        by_pred.setdefault((atom.kind, atom.predicate), []).append(atom)

    def guaranteed_distinct(t1: Term, t2: Term) -> bool:
        if t1 == t2:
            return False
        if t1.is_const and t2.is_const:
            return True
        from .model import neq_atom as mk

        return mk(t1, t2) in dst.atoms

    def neq_ok(binding) -> bool:
        for atom in neqs:
            imgs = []
            for t in atom.terms:
                img = binding.get(t.name) if t.is_var else t
                imgs.append(img)
            if imgs[0] is not None and imgs[1] is not None:
                if not guaranteed_distinct(imgs[0], imgs[1]):
                    return False
        return True

    def backtrack(i: int, binding: dict[str, Term]) -> int:
        if i == len(rel):
            return 1 if neq_ok(binding) else 0
        atom = rel[i]
        total = 0
        for cand in by_pred.get((atom.kind, atom.predicate), ()):
            new = dict(binding)
            ok = True
            for t, target in zip(atom.terms, cand.terms):
                if t.is_const:
                    if target != t:
                        ok = False
                        break
                else:
                    bound = new.get(t.name)
                    if bound is None:
                        new[t.name] = target
                    elif bound != target:
                        ok = False
                        break
            if ok and neq_ok(new):
                total += backtrack(i + 1, new)
        return total

    return backtrack(0, {})


def count_automorphisms(cq: CQ) -> int:
    """Number of disequality-respecting homomorphisms of cq onto itself."""
    n = count_query_homs(cq, cq)
    if n < 1:
        raise RespoError("a satisfiable query has at least the identity automorphism")
    return n


def build_counting_queries(ucq: CQ | UCQ, k: int) -> tuple[CountingQuery, ...]:
    """Rigidify the size-k reducts and prune hom-redundant ones.

    Disequalities are present before the pruning pass and every
    homomorphism test respects them; pruning keeps the hom-minimal
    queries (deleting a query whose witness is later deleted is harmless
    because homomorphisms compose).
    """
    ucq = as_ucq(ucq)
    pins = ucq_constants(ucq)
    rigid: dict[tuple, CQ] = {}
    for q in reducts(ucq, k):
        aug = canonicalize(with_all_pairs_neq(q, pins))
        rigid.setdefault(canonical_form(aug), aug)
    candidates = sorted(rigid.values(), key=canonical_form)
    kept: list[CQ] = []
    for q in candidates:
        redundant = False
        for other in candidates:
            if other is q or not query_hom_exists(other, q):
                continue
            if query_hom_exists(q, other) and canonical_form(q) < canonical_form(other):
                continue  # hom-equivalent pair: keep the smaller form only
            redundant = True
            break
        if not redundant:
            kept.append(q)
    return tuple(
        CountingQuery(cq=q, gamma=Fraction(1, count_automorphisms(q))) for q in kept
    )


# ---------------------------------------------------------------------------
# Partition counting
# ---------------------------------------------------------------------------

def count_fms_partition(ucq: CQ | UCQ, k: int, facts: Iterable[Fact] | FactDB) -> int:
    """countFMS(k) as the gamma-weighted sum of homomorphism counts over
    the counting queries.  The sum is integral by construction; a
    fractional result signals a pipeline bug."""
    db = facts if isinstance(facts, FactDB) else FactDB(facts)
    total = Fraction(0)
    for cq in build_counting_queries(ucq, k):
        n = count_homomorphisms(cq.cq, db)
        total += n * cq.gamma
    if total.denominator != 1:
        raise RespoError(f"non-integral partition count {total}")
    return int(total)


def partition_histogram(ucq: CQ | UCQ, facts: Iterable[Fact] | FactDB) -> SupportHistogram:
    ucq = as_ucq(ucq)
    db = facts if isinstance(facts, FactDB) else FactDB(facts)
    max_k = max(len(d.relational_atoms()) for d in ucq.disjuncts)
    return SupportHistogram(
        {k: count_fms_partition(ucq, k, db) for k in range(1, max_k + 1)}
    )


def count_fms_containing(
    fact: Fact,
    k: int,
    histogram_provider: Callable[[frozenset[Fact]], SupportHistogram],
    facts: Iterable[Fact],
) -> int:
    """Number of size-k minimal supports containing the fact: the k-counts
    over D minus those over D without the fact (a minimal support omitting
    the fact is exactly a minimal support of the smaller database)."""
    pool = frozenset(facts)
    with_fact = histogram_provider(pool)
    without = histogram_provider(pool - {fact})
    return with_fact[k] - without[k]
