"""Query algebra shared by the rewriter and the counting pipelines:
substitution, canonical variable naming, homomorphisms between queries,
atom unification, and disequality augmentation.
"""

from __future__ import annotations

from itertools import permutations

from .model import (
    CONST,
    NEQ_ATOM,
    Atom,
    CQ,
    Term,
    UCQ,
    neq_atom,
    var,
)


class UnsatisfiableQuery(Exception):
    """Raised when a substitution collapses the two sides of a disequality
    or forces two distinct constants to unify."""


def substitute(cq: CQ, mapping: dict[str, Term]) -> CQ:
    """Apply a variable substitution.  Raises UnsatisfiableQuery when a
    disequality degenerates to t != t."""

    def image(t: Term) -> Term:
        if t.is_var and t.name in mapping:
            return mapping[t.name]
        return t

    atoms: list[Atom] = []
    for atom in cq.atoms:
        new_terms = tuple(image(t) for t in atom.terms)
        if atom.kind == NEQ_ATOM:
            if new_terms[0] == new_terms[1]:
                raise UnsatisfiableQuery(f"{atom!r} collapses under substitution")
            if new_terms[0].is_const and new_terms[1].is_const:
                continue  # distinct constants: vacuous under unique names
            atoms.append(neq_atom(*new_terms))
        else:
            atoms.append(Atom(atom.kind, atom.predicate, new_terms))
    return CQ(tuple(atoms))


def rename_apart(cq: CQ, taken: set[str], prefix: str = "v") -> CQ:
    """Rename the variables of cq so they avoid `taken`."""
    mapping: dict[str, Term] = {}
    counter = 0
    for v in cq.variables():
        if v in taken:
            while f"{prefix}{counter}" in taken or f"{prefix}{counter}" in mapping:
                counter += 1
            mapping[v] = var(f"{prefix}{counter}")
            counter += 1
    return substitute(cq, mapping) if mapping else cq


def fresh_var(taken: set[str], prefix: str = "w") -> str:
    i = 0
    while f"{prefix}{i}" in taken:
        i += 1
    return f"{prefix}{i}"


# ---------------------------------------------------------------------------
# Canonical forms
# ---------------------------------------------------------------------------

def _atom_signature(atom: Atom, t: Term):
    positions = tuple(i for i, term in enumerate(atom.terms) if term == t)
    others = tuple(
        (term.kind, term.name if term.is_const else None)
        for term in atom.terms
        if term != t
    )
    return (atom.kind, atom.predicate or "", positions, others)


def _variable_signature(cq: CQ, name: str):
    t = var(name)
    sig = sorted(_atom_signature(atom, t) for atom in cq.atoms if t in atom.terms)
    return tuple(sig)


def canonical_form(cq: CQ) -> tuple:
    """A renaming-invariant key: the minimal atom tuple over all variable
    orderings compatible with the variables' structural signatures.

    Two CQs have equal canonical forms iff they are identical up to
    variable renaming.  Intended for the small queries handled by the
    reduct/rewriting machinery.
    """
    names = cq.variables()
    if not names:
        return tuple(_render_atom(a, {}) for a in cq.atoms)

    groups: dict[tuple, list[str]] = {}
    for name in names:
        groups.setdefault(_variable_signature(cq, name), []).append(name)
    ordered_groups = [groups[sig] for sig in sorted(groups)]

    best: tuple | None = None
    for ordering in _group_orderings(ordered_groups):
        rename = {name: i for i, name in enumerate(ordering)}
        key = tuple(sorted(_render_atom(a, rename) for a in cq.atoms))
        if best is None or key < best:
            best = key
    return best


def _group_orderings(groups: list[list[str]]):
    """All concatenations of per-group permutations (groups are small in
    practice because signatures separate most variables)."""

    def rec(i: int, acc: list[str]):
        if i == len(groups):
            yield tuple(acc)
            return
        for perm in permutations(groups[i]):
            yield from rec(i + 1, acc + list(perm))

    yield from rec(0, [])


def _render_atom(atom: Atom, rename: dict[str, int]):
    parts = []
    for t in atom.terms:
        if t.is_var:
            parts.append(("v", rename[t.name]))
        elif t.is_const:
            parts.append(("c", t.name))
        else:
            parts.append(("a", ""))
    return (atom.kind, atom.predicate or "", tuple(parts))


def canonicalize(cq: CQ) -> CQ:
    """Rewrite cq with canonical variable names v0, v1, ..."""
    names = cq.variables()
    if not names:
        return cq
    groups: dict[tuple, list[str]] = {}
    for name in names:
        groups.setdefault(_variable_signature(cq, name), []).append(name)
    ordered_groups = [groups[sig] for sig in sorted(groups)]

    best_key: tuple | None = None
    best_order: tuple[str, ...] | None = None
    for ordering in _group_orderings(ordered_groups):
        rename = {name: i for i, name in enumerate(ordering)}
        key = tuple(sorted(_render_atom(a, rename) for a in cq.atoms))
        if best_key is None or key < best_key:
            best_key, best_order = key, ordering
    mapping = {name: var(f"v{i}") for i, name in enumerate(best_order)}
    return substitute(cq, mapping)


# ---------------------------------------------------------------------------
# Homomorphisms between queries
# ---------------------------------------------------------------------------

def _guaranteed_distinct(dst: CQ, t1: Term, t2: Term) -> bool:
    if t1 == t2:
        return False
    if t1.is_const and t2.is_const:
        return True  # unique name assumption
    return neq_atom(t1, t2) in dst.atoms


def query_hom_exists(src: CQ, dst: CQ) -> bool:
    """Is there a homomorphism src -> dst?

    Constants are fixed, relational atoms must map onto atoms of dst, and
    each disequality of src must land on a pair that dst guarantees
    distinct (a disequality atom of dst, or two distinct constants).
    """
    rel = list(src.relational_atoms())
    neqs = src.neq_atoms()
    dst_rel = dst.relational_atoms()
    by_pred: dict[tuple[str, str], list[Atom]] = {}
    for atom in dst_rel:
        by_pred.setdefault((atom.kind, atom.predicate), []).append(atom)

    rel.sort(key=lambda a: len(a.variables()))

    def check_neqs(mapping: dict[str, Term]) -> bool:
        for atom in neqs:
            imgs = []
            ok = True
            for t in atom.terms:
                img = mapping.get(t.name) if t.is_var else t
                if img is None:
                    ok = False
                    break
                imgs.append(img)
            if ok and not _guaranteed_distinct(dst, imgs[0], imgs[1]):
                return False
        return True

    def backtrack(i: int, mapping: dict[str, Term]) -> bool:
        if i == len(rel):
            return _final_neq_check(mapping)
        atom = rel[i]
        for cand in by_pred.get((atom.kind, atom.predicate), ()):
            new = dict(mapping)
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
            if ok and check_neqs(new) and backtrack(i + 1, new):
                return True
        return False

    def _final_neq_check(mapping: dict[str, Term]) -> bool:
        for atom in neqs:
            imgs = [mapping[t.name] if t.is_var else t for t in atom.terms]
            if None in imgs:
                return False
            if not _guaranteed_distinct(dst, imgs[0], imgs[1]):
                return False
        return True

    # Disequality-only variables have no relational anchor in src; such
    # queries are rejected upstream, so every variable gets bound here.
    return backtrack(0, {})


# ---------------------------------------------------------------------------
# Unification
# ---------------------------------------------------------------------------

def unify_atoms(a: Atom, b: Atom) -> dict[str, Term] | None:
    """Most general unifier of two relational atoms with the same
    predicate, as a variable substitution; None when they do not unify."""
    if a.kind != b.kind or a.predicate != b.predicate or a.kind == NEQ_ATOM:
        return None
    mapping: dict[str, Term] = {}

    def resolve(t: Term) -> Term:
        while t.is_var and t.name in mapping:
            t = mapping[t.name]
        return t

    for t1, t2 in zip(a.terms, b.terms):
        r1, r2 = resolve(t1), resolve(t2)
        if r1 == r2:
            continue
        if r1.is_var:
            mapping[r1.name] = r2
        elif r2.is_var:
            mapping[r2.name] = r1
        else:
            return None  # two distinct constants
    # Flatten chains so every image is fully resolved.
    flat: dict[str, Term] = {}
    for name in list(mapping):
        flat[name] = resolve(var(name))
    return flat


# ---------------------------------------------------------------------------
# Disequality augmentation
# ---------------------------------------------------------------------------

def with_all_pairs_neq(cq: CQ, pinned_constants: tuple[str, ...] = ()) -> CQ:
    """Add a disequality for every variable pair and every variable/constant
    pair (constant pairs are distinct already).

    Pinning variables away from constants, not just from each other, keeps
    homomorphisms of the resulting query injective on terms.  The pinned
    set may extend beyond the query's own constants: in a union, a
    variable must also be distinguished from the constants of the other
    disjuncts, whose supports it could otherwise shadow.
    """
    atoms = list(cq.atoms)
    vs = [var(v) for v in cq.variables()]
    cs = [Term(CONST, c) for c in sorted(set(cq.constants()) | set(pinned_constants))]
    for i, t1 in enumerate(vs):
        for t2 in vs[i + 1:]:
            atoms.append(neq_atom(t1, t2))
        for c in cs:
            atoms.append(neq_atom(t1, c))
    return CQ(tuple(atoms))


def max_relational_size(ucq: UCQ) -> int:
    return max(len(d.relational_atoms()) for d in ucq.disjuncts)
