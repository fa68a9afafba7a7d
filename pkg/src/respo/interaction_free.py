"""The interaction-free fast path.

An OMQ is interaction-free when no single generic assertion can satisfy
two distinct (atom, assignment) pairs of the query under the TBox.  For
such OMQs every minimal support picks exactly one fact per query atom, so
counting minimal supports factorizes: instantiate each atom over the ABox
individuals (plus a per-atom anonymous witness where the ontology can
supply one), weight each instantiation by its number of singleton
supports, and sum weight products over homomorphisms by dynamic
programming along a tree decomposition.  Connected components multiply.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product

from .model import (
    ANON,
    ABox,
    Atom,
    CONCEPT_ATOM,
    CQ,
    Fact,
    InconsistentKBError,
    OMQ,
    RespoError,
    SupportHistogram,
    TBox,
    UnsupportedTBoxError,
    WeightedDatabase,
    WeightedFact,
    connected_components,
    const,
)
from .reasoner import holds_under_assignment, is_consistent


class NotInteractionFreeError(RespoError):
    """The OMQ failed the interaction-freeness check; callers fall back to
    another pipeline."""


# ---------------------------------------------------------------------------
# Interaction-freeness check
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InteractionWitness:
    """A generic assertion satisfying two distinct (atom, assignment)
    pairs."""

    fact_shape: Fact
    atom1: Atom
    assignment1: tuple[tuple[str, str], ...]
    atom2: Atom
    assignment2: tuple[tuple[str, str], ...]

    def __str__(self) -> str:
        def fmt(atom, assignment):
            binding = ", ".join(f"?{v}->{val}" for v, val in assignment)
            return f"{atom!r} [{binding}]" if binding else f"{atom!r}"

        return (
            f"fact {self.fact_shape.predicate}({','.join(self.fact_shape.args)}) "
            f"satisfies both {fmt(self.atom1, self.assignment1)} "
            f"and {fmt(self.atom2, self.assignment2)}"
        )


def _query_cq(omq: OMQ) -> CQ:
    if len(omq.query.disjuncts) != 1:
        raise UnsupportedTBoxError("interaction-freeness is defined for single CQs")
    cq = omq.query.disjuncts[0]
    if cq.neq_atoms():
        raise UnsupportedTBoxError(
            "interaction-freeness is defined for plain CQs (no disequalities)"
        )
    return cq


def _fact_shapes(omq: OMQ, cq: CQ) -> list[Fact]:
    """Generic assertions covering every shape a real fact can take w.r.t.
    the query: concept/role facts over the query's constants plus two
    fresh ones (DL-Lite_R axioms cannot distinguish further constants;
    the repeated-constant role shape covers self-loops)."""
    concepts = sorted(
        omq.tbox.concept_names() | {a.predicate for a in cq.atoms if a.kind == CONCEPT_ATOM}
    )
    roles = sorted(
        omq.tbox.role_names()
        | {a.predicate for a in cq.atoms if a.is_relational and a.kind != CONCEPT_ATOM}
    )
    pool = list(cq.constants()) + ["fresh#1", "fresh#2"]
    shapes: list[Fact] = []
    i = 0
    for name in concepts:
        for c in pool:
            shapes.append(Fact(f"shape{i}", name, (c,)))
            i += 1
    for name in roles:
        for c1 in pool:
            for c2 in pool:
                shapes.append(Fact(f"shape{i}", name, (c1, c2)))
                i += 1
    return shapes


def _satisfying_pairs(tbox: TBox, fact: Fact, cq: CQ):
    """All (atom, assignment into const(f) + anon) pairs the single fact
    satisfies."""
    abox = ABox((fact,))
    values: list = sorted(set(fact.args)) + [ANON]
    pairs = []
    for atom in cq.relational_atoms():
        vs = sorted(set(atom.variables()))
        for combo in product(values, repeat=len(vs)):
            mu = dict(zip(vs, combo))
            if holds_under_assignment(abox, tbox, CQ((atom,)), mu):
                key = tuple(
                    (v, "<anon>" if mu[v] is ANON else mu[v]) for v in vs
                )
                pairs.append((atom, key))
    return pairs


@lru_cache(maxsize=None)
def check_interaction_free(omq: OMQ) -> InteractionWitness | None:
    """None when interaction-free, otherwise the first violating witness
    (deterministic order)."""
    if omq.tbox.horn_extended:
        raise UnsupportedTBoxError("interaction-freeness requires a DL-Lite_R TBox")
    cq = _query_cq(omq)
    for shape in _fact_shapes(omq, cq):
        if not is_consistent(ABox((shape,)), omq.tbox):
            continue  # such a fact can occur in no consistent ABox
        pairs = _satisfying_pairs(omq.tbox, shape, cq)
        if len(pairs) >= 2:
            (a1, mu1), (a2, mu2) = pairs[0], pairs[1]
            return InteractionWitness(shape, a1, mu1, a2, mu2)
    return None


# ---------------------------------------------------------------------------
# Atom support weights
# ---------------------------------------------------------------------------

def atom_support_weight(
    abox: ABox,
    tbox: TBox,
    atom: Atom,
    mu: dict,
    allow_double_anon: bool = False,
) -> int:
    """Number of single facts f with ({f}, T) |=_mu atom.

    For fully-constant instantiations this counts the singleton supports
    of the instantiated atomic query; for R(c, anon) it counts facts that
    entail exists R(c) without any named R-successor (a named witness
    suppresses the anonymous one in the canonical model, so the two
    readings coincide).
    """
    vs = set(atom.variables())
    missing = vs - set(mu)
    if missing:
        raise ValueError(f"assignment misses variables {sorted(missing)}")
    anon_count = sum(1 for v in vs if mu[v] is ANON or mu[v] == ANON)
    if not allow_double_anon and len(atom.terms) == 2 and anon_count == len(vs) == 2:
        raise RespoError("both positions anonymous is excluded for shared-variable atoms")
    mu_key = tuple(sorted((v, mu[v]) for v in vs))
    total = 0
    for f in abox:
        if _fact_supports(f, tbox, atom, mu_key):
            total += 1
    return total


@lru_cache(maxsize=None)
def _fact_supports(fact: Fact, tbox: TBox, atom: Atom, mu_key) -> bool:
    return holds_under_assignment(ABox((fact,)), tbox, CQ((atom,)), dict(mu_key))


# ---------------------------------------------------------------------------
# Weighted database construction
# ---------------------------------------------------------------------------

def _slot_atoms(cq: CQ) -> tuple[Atom, ...]:
    return cq.relational_atoms()


def build_weighted_db(omq: OMQ, abox: ABox) -> WeightedDatabase:
    """All-constant instantiations of each query atom, weighted by their
    singleton-support counts; zero-weight entries are dropped.  Entries are
    keyed per atom occurrence, so shared (predicate, args) pairs across
    atoms cannot alias."""
    cq = _query_cq(omq)
    individuals = sorted(abox.individuals)
    weights: dict[WeightedFact, int] = {}
    for slot, atom in enumerate(_slot_atoms(cq)):
        vs = sorted(set(atom.variables()))
        for combo in product(individuals, repeat=len(vs)):
            mu = dict(zip(vs, combo))
            w = atom_support_weight(abox, omq.tbox, atom, mu)
            if w > 0:
                args = tuple(
                    t.name if t.is_const else mu[t.name] for t in atom.terms
                )
                weights[WeightedFact(slot, atom.predicate, args)] = w
    return WeightedDatabase(weights)


def _shared_variables(cq: CQ) -> set[str]:
    counts: dict[str, int] = {}
    for atom in cq.relational_atoms():
        for v in set(atom.variables()):
            counts[v] = counts.get(v, 0) + 1
    return {v for v, n in counts.items() if n >= 2}


def anon_constant(slot: int) -> str:
    # '#' cannot occur in parsed constants, so these never collide.
    return f"anon#{slot}"


def extend_with_anonymous(
    wdb: WeightedDatabase, omq: OMQ, abox: ABox
) -> WeightedDatabase:
    """Add R(c, c_atom) entries for role atoms pairing a shared variable
    with an unshared one: the unshared end may be realized by an anonymous
    witness that a single fact provides.  Fresh constants are per atom
    occurrence, preventing accidental joins."""
    cq = _query_cq(omq)
    shared = _shared_variables(cq)
    individuals = sorted(abox.individuals)
    extra: dict[WeightedFact, int] = {}
    for slot, atom in enumerate(_slot_atoms(cq)):
        if atom.kind == CONCEPT_ATOM:
            continue
        t1, t2 = atom.terms
        unshared_pos = None
        if t2.is_var and t2.name not in shared and t1.is_var and t1.name in shared:
            unshared_pos = 1
        elif t1.is_var and t1.name not in shared and t2.is_var and t2.name in shared:
            unshared_pos = 0
        if unshared_pos is None:
            continue
        shared_var = atom.terms[1 - unshared_pos].name
        unshared_var = atom.terms[unshared_pos].name
        for c in individuals:
            mu = {shared_var: c, unshared_var: ANON}
            w = atom_support_weight(abox, omq.tbox, atom, mu)
            if w > 0:
                args = [c, anon_constant(slot)]
                if unshared_pos == 0:
                    args.reverse()
                extra[WeightedFact(slot, atom.predicate, tuple(args))] = w
    return wdb.extended(extra)


# ---------------------------------------------------------------------------
# Tree decomposition
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TreeDecomposition:
    """Bags of variables arranged in a forest (parent index per bag, -1
    for roots)."""

    bags: tuple[frozenset[str], ...]
    parents: tuple[int, ...]

    @property
    def width(self) -> int:
        return max((len(b) for b in self.bags), default=1) - 1


EXACT_TREEWIDTH_LIMIT = 13


def _variable_graph(cq: CQ) -> tuple[list[str], dict[str, set[str]]]:
    variables = list(cq.variables())
    adj: dict[str, set[str]] = {v: set() for v in variables}
    for atom in cq.relational_atoms():
        vs = sorted(set(atom.variables()))
        for i, v1 in enumerate(vs):
            for v2 in vs[i + 1:]:
                adj[v1].add(v2)
                adj[v2].add(v1)
    return variables, adj


def _elimination_order_exact(variables: list[str], adj: dict[str, set[str]]) -> list[str]:
    """Minimal-width elimination order via subset dynamic programming.

    Q(S, v) counts the vertices outside S reachable from v through S;
    eliminating v right after the prefix S yields a bag of that size.
    """
    n = len(variables)
    index = {v: i for i, v in enumerate(variables)}

    def q(s_mask: int, v: int) -> int:
        seen = 1 << v
        stack = [v]
        reach = 0
        while stack:
            u = stack.pop()
            for w_name in adj[variables[u]]:
                w = index[w_name]
                if seen >> w & 1:
                    continue
                seen |= 1 << w
                if s_mask >> w & 1:
                    stack.append(w)
                else:
                    reach += 1
        return reach

    best = {0: -1}
    choice: dict[int, int] = {}
    masks_by_size: list[list[int]] = [[] for _ in range(n + 1)]
    for mask in range(1 << n):
        masks_by_size[bin(mask).count("1")].append(mask)
    for size in range(1, n + 1):
        for mask in masks_by_size[size]:
            value = None
            pick = -1
            for v in range(n):
                if not mask >> v & 1:
                    continue
                prev = mask & ~(1 << v)
                cand = max(best[prev], q(prev, v))
                if value is None or cand < value:
                    value, pick = cand, v
            best[mask] = value
            choice[mask] = pick
    order = [""] * n
    mask = (1 << n) - 1
    for pos in range(n - 1, -1, -1):
        v = choice[mask]
        order[pos] = variables[v]
        mask &= ~(1 << v)
    return order


def _elimination_order_minfill(variables: list[str], adj: dict[str, set[str]]) -> list[str]:
    work = {v: set(ns) for v, ns in adj.items()}
    order = []
    remaining = set(variables)
    while remaining:
        def fill(v: str) -> int:
            ns = sorted(work[v])
            return sum(
                1
                for i, a in enumerate(ns)
                for b in ns[i + 1:]
                if b not in work[a]
            )

        v = min(sorted(remaining), key=fill)
        order.append(v)
        ns = sorted(work[v])
        for i, a in enumerate(ns):
            for b in ns[i + 1:]:
                work[a].add(b)
                work[b].add(a)
        for u in ns:
            work[u].discard(v)
        del work[v]
        remaining.remove(v)
    return order


def tree_decompose(cq: CQ) -> TreeDecomposition:
    """A valid tree decomposition of the query's variable co-occurrence
    graph: exact minimum width up to 13 variables, min-fill beyond."""
    variables, adj = _variable_graph(cq)
    if not variables:
        return TreeDecomposition((frozenset(),), (-1,))
    if len(variables) <= EXACT_TREEWIDTH_LIMIT:
        order = _elimination_order_exact(variables, adj)
    else:
        order = _elimination_order_minfill(variables, adj)

    work = {v: set(ns) for v, ns in adj.items()}
    bags: list[frozenset[str]] = []
    bag_of: dict[str, int] = {}
    for v in order:
        bag = frozenset({v} | work[v])
        bag_of[v] = len(bags)
        bags.append(bag)
        ns = sorted(work[v])
        for i, a in enumerate(ns):
            for b in ns[i + 1:]:
                work[a].add(b)
                work[b].add(a)
        for u in ns:
            work[u].discard(v)
        del work[v]

    position = {v: i for i, v in enumerate(order)}
    parents = []
    for i, v in enumerate(order):
        rest = [u for u in bags[i] if u != v]
        if rest:
            nxt = min(rest, key=lambda u: position[u])
            parents.append(bag_of[nxt])
        else:
            parents.append(-1)
    return TreeDecomposition(tuple(bags), tuple(parents))


# ---------------------------------------------------------------------------
# Weighted evaluation
# ---------------------------------------------------------------------------

def weighted_eval(cq: CQ, wdb: WeightedDatabase, td: TreeDecomposition) -> int:
    """Sum over homomorphisms of the product of per-atom weights, by
    message passing over the decomposition.  Each atom is charged at one
    bag covering its variables and matches only its own slot's entries."""
    atoms = _slot_atoms(cq)
    tables = [wdb.slot_entries(slot) for slot in range(len(atoms))]

    domains: dict[str, set[str]] = {}
    for slot, atom in enumerate(atoms):
        per_var: dict[str, set[str]] = {}
        for args in tables[slot]:
            ok = all(
                t.name == value
                for t, value in zip(atom.terms, args)
                if t.is_const
            )
            if not ok:
                continue
            pairwise = {}
            consistent = True
            for t, value in zip(atom.terms, args):
                if t.is_var:
                    if pairwise.setdefault(t.name, value) != value:
                        consistent = False
                        break
            if not consistent:
                continue
            for v, value in pairwise.items():
                per_var.setdefault(v, set()).add(value)
        for v in atom.variables():
            values = per_var.get(v, set())
            if v in domains:
                domains[v] &= values
            else:
                domains[v] = set(values)

    for v in cq.variables():
        if not domains.get(v):
            return 0

    bag_assignments: dict[int, list[int]] = {i: [] for i in range(len(td.bags))}
    for slot, atom in enumerate(atoms):
        vs = set(atom.variables())
        home = None
        for i, bag in enumerate(td.bags):
            if vs <= bag:
                home = i
                break
        if home is None:
            raise RespoError("tree decomposition does not cover an atom")
        bag_assignments[home].append(slot)

    children: dict[int, list[int]] = {i: [] for i in range(len(td.bags))}
    roots = []
    for i, p in enumerate(td.parents):
        if p == -1:
            roots.append(i)
        else:
            children[p].append(i)

    def atom_weight(slot: int, assignment: dict[str, str]) -> int:
        atom = atoms[slot]
        args = tuple(
            t.name if t.is_const else assignment[t.name] for t in atom.terms
        )
        return tables[slot].get(args, 0)

    def eval_node(node: int, parent_bag: frozenset[str]):
        bag_vars = sorted(td.bags[node])
        sep_vars = sorted(td.bags[node] & parent_bag)
        child_results = [
            eval_node(c, td.bags[node]) for c in children[node]
        ]
        out: dict[tuple[str, ...], int] = {}
        pools = [sorted(domains[v]) for v in bag_vars]
        for values in product(*pools):
            assignment = dict(zip(bag_vars, values))
            weight = 1
            for slot in bag_assignments[node]:
                w = atom_weight(slot, assignment)
                if w == 0:
                    weight = 0
                    break
                weight *= w
            if weight == 0:
                continue
            for (sep, table) in child_results:
                key = tuple(assignment[v] for v in sep)
                sub = table.get(key, 0)
                if sub == 0:
                    weight = 0
                    break
                weight *= sub
            if weight == 0:
                continue
            key = tuple(assignment[v] for v in sep_vars)
            out[key] = out.get(key, 0) + weight
        return sep_vars, out

    total = 1
    for root in roots:
        _, table = eval_node(root, frozenset())
        total *= sum(table.values())
        if total == 0:
            return 0
    return total


# ---------------------------------------------------------------------------
# The full pipeline
# ---------------------------------------------------------------------------

def _single_atom_count(tbox: TBox, atom: Atom, abox: ABox) -> int:
    """Minimal supports of a single-atom component: sum the per-assignment
    singleton-support counts over constant/anonymous instantiations.
    Interaction-freeness keeps the per-assignment families disjoint."""
    vs = sorted(set(atom.variables()))
    values: list = sorted(abox.individuals) + [ANON]
    total = 0
    for combo in product(values, repeat=len(vs)):
        mu = dict(zip(vs, combo))
        total += atom_support_weight(abox, tbox, atom, mu, allow_double_anon=True)
    return total


def count_ms_interaction_free(omq: OMQ, abox: ABox) -> SupportHistogram:
    """countFMS for an interaction-free OMQ: per-component counts (weighted
    evaluation for multi-atom components, direct summation for single-atom
    ones) multiplied together, all supports having exactly one fact per
    query atom."""
    cq = _query_cq(omq)
    if not is_consistent(abox, omq.tbox):
        raise InconsistentKBError("cannot count over an inconsistent KB")
    witness = check_interaction_free(omq)
    if witness is not None:
        raise NotInteractionFreeError(str(witness))

    total = 1
    for component in connected_components(cq):
        rel = component.relational_atoms()
        if len(rel) == 1:
            value = _single_atom_count(omq.tbox, rel[0], abox)
        else:
            sub_omq = OMQ(omq.tbox, component)
            wdb = build_weighted_db(sub_omq, abox)
            wdb = extend_with_anonymous(wdb, sub_omq, abox)
            td = tree_decompose(component)
            value = weighted_eval(component, wdb, td)
        total *= value
        if total == 0:
            break

    size = len(cq.relational_atoms())
    return SupportHistogram({size: total})
