"""Seeded random instances for the cross-pipeline property suites: small
DL-Lite_R TBoxes, ABoxes, databases, and (U)CQs with optional constants
and disequalities.  Shared by the test suite and the `verify` command.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .model import (
    ABox,
    Atom,
    Axiom,
    CONCEPT_INCLUSION,
    CQ,
    Fact,
    OMQ,
    ROLE_INCLUSION,
    Role,
    TBox,
    UCQ,
    concept,
    concept_atom,
    const,
    exists,
    neq_atom,
    role_atom,
    var,
)
from .reasoner import is_consistent

CONCEPT_NAMES = ["A", "B", "C"]
ROLE_NAMES = ["r", "s"]
CONSTANTS = ["c", "d", "e", "g", "h"]
VARIABLES = ["x", "y", "z", "w"]


def random_basic_concept(rng: random.Random) -> object:
    if rng.random() < 0.55:
        return concept(rng.choice(CONCEPT_NAMES))
    return exists(Role(rng.choice(ROLE_NAMES), rng.random() < 0.4))


def random_dllite_tbox(
    rng: random.Random, max_axioms: int = 5, allow_negative: bool = True
) -> TBox:
    axioms = set()
    for _ in range(rng.randint(0, max_axioms)):
        if rng.random() < 0.2:
            lhs = Role(rng.choice(ROLE_NAMES), rng.random() < 0.3)
            rhs = Role(rng.choice(ROLE_NAMES), rng.random() < 0.3)
            negated = allow_negative and rng.random() < 0.15
            axioms.add(Axiom(ROLE_INCLUSION, lhs, rhs, negated))
        else:
            lhs = random_basic_concept(rng)
            rhs = random_basic_concept(rng)
            negated = allow_negative and rng.random() < 0.15
            axioms.add(Axiom(CONCEPT_INCLUSION, lhs, rhs, negated))
    return TBox(frozenset(axioms))


def random_abox(
    rng: random.Random,
    max_facts: int = 5,
    bias: "UCQ | None" = None,
    tbox: TBox | None = None,
) -> ABox:
    """A random ABox.  When `bias` (and optionally a TBox) is given, most
    facts instantiate the query's atoms or the TBox's left-hand sides over
    a small constant pool, so entailment is non-trivially exercised."""
    pool = CONSTANTS[:3]
    shapes: list[tuple[str, int]] = []
    if bias is not None:
        for d in bias.disjuncts:
            for atom in d.relational_atoms():
                shapes.append((atom.predicate, len(atom.terms)))
    if tbox is not None:
        for ax in tbox.axioms:
            if ax.negated:
                continue
            if ax.kind == ROLE_INCLUSION:
                shapes.append((ax.lhs.name, 2))
            elif ax.lhs.is_name:
                shapes.append((ax.lhs.concept_name, 1))
            else:
                shapes.append((ax.lhs.role.name, 2))
    # TBox axioms live in a frozenset; sort so instance generation does not
    # depend on hash seeding.
    shapes.sort()

    facts: list[Fact] = []
    contents = set()
    for i in range(rng.randint(1, max_facts)):
        if shapes and rng.random() < 0.7:
            pred, arity = rng.choice(shapes)
        elif rng.random() < 0.5:
            pred, arity = rng.choice(CONCEPT_NAMES), 1
        else:
            pred, arity = rng.choice(ROLE_NAMES), 2
        args = tuple(rng.choice(pool) for _ in range(arity))
        key = (pred, args)
        if key in contents:
            continue
        contents.add(key)
        facts.append(Fact(f"f{i}", pred, args))
    return ABox(tuple(facts))


def random_cq(
    rng: random.Random,
    max_atoms: int = 3,
    allow_constants: bool = True,
    allow_neq: bool = True,
    connected_neq_only: bool = True,
) -> CQ:
    """A random Boolean CQ(+/-) whose disequalities stay inside one
    component (the parser-level requirement)."""
    n_atoms = rng.randint(1, max_atoms)
    atoms: list[Atom] = []
    for _ in range(n_atoms):
        def term():
            if allow_constants and rng.random() < 0.25:
                return const(rng.choice(CONSTANTS[:2]))
            return var(rng.choice(VARIABLES))

        if rng.random() < 0.45:
            atoms.append(concept_atom(rng.choice(CONCEPT_NAMES), term()))
        else:
            atoms.append(role_atom(rng.choice(ROLE_NAMES), term(), term()))
    cq = CQ(tuple(atoms))
    if allow_neq and rng.random() < 0.4:
        from .model import connected_components

        components = connected_components(cq)
        target = components[rng.randrange(len(components))] if connected_neq_only else cq
        terms = [var(v) for v in target.variables()]
        terms.extend(const(c) for c in target.constants())
        if len(terms) >= 2:
            t1, t2 = rng.sample(terms, 2)
            if t1 != t2:
                atoms.append(neq_atom(t1, t2))
                cq = CQ(tuple(atoms))
    return cq


def random_ucq(rng: random.Random, max_disjuncts: int = 2, max_atoms: int = 3) -> UCQ:
    return UCQ(
        tuple(
            random_cq(rng, max_atoms=max_atoms)
            for _ in range(rng.randint(1, max_disjuncts))
        )
    )


def random_database(
    rng: random.Random, max_facts: int = 6, bias: "UCQ | None" = None
) -> ABox:
    return random_abox(rng, max_facts=max_facts, bias=bias)


def random_consistent_kb(
    rng: random.Random,
    max_axioms: int = 5,
    max_facts: int = 5,
    bias: "UCQ | None" = None,
) -> tuple[TBox, ABox]:
    """Rejection-sample a consistent TBox/ABox pair."""
    while True:
        tbox = random_dllite_tbox(rng, max_axioms=max_axioms)
        abox = random_abox(rng, max_facts=max_facts, bias=bias, tbox=tbox)
        if is_consistent(abox, tbox):
            return tbox, abox


def random_interaction_free_omq(
    rng: random.Random, max_atoms: int = 4
) -> OMQ:
    """Rejection-sample an interaction-free OMQ (plain CQ, DL-Lite_R).
    Mixes empty, positive-only, and existential TBoxes so anonymous
    matching is exercised."""
    from .interaction_free import check_interaction_free

    while True:
        style = rng.random()
        if style < 0.35:
            tbox = TBox()
        else:
            tbox = random_dllite_tbox(rng, max_axioms=3, allow_negative=False)
        cq = random_cq(rng, max_atoms=max_atoms, allow_constants=True, allow_neq=False)
        omq = OMQ(tbox, cq)
        try:
            if check_interaction_free(omq) is None:
                return omq
        except Exception:
            continue
