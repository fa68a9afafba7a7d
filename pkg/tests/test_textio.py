import pytest

from respo.model import (
    Axiom,
    CONCEPT_INCLUSION,
    ConjunctionAxiom,
    QualifiedExistsAxiom,
    Role,
    concept,
    exists,
)
from respo.textio import (
    ParseError,
    parse_abox,
    parse_query,
    parse_tbox,
    render_abox,
    render_query,
    render_tbox,
)


def test_parse_concept_inclusion():
    tbox = parse_tbox("Seafood <= FishBased\n")
    assert Axiom(CONCEPT_INCLUSION, concept("Seafood"), concept("FishBased")) in tbox.axioms


def test_parse_inverse_exists():
    tbox = parse_tbox("exists r- <= B\n")
    ax = next(iter(tbox.axioms))
    assert ax.lhs == exists(Role("r", True))
    assert ax.rhs == concept("B")


def test_parse_negated_rhs():
    tbox = parse_tbox("A <= !exists s\n")
    ax = next(iter(tbox.axioms))
    assert ax.negated and ax.rhs == exists(Role("s"))


def test_parse_role_inclusion_and_horn_shapes():
    tbox = parse_tbox(
        "role: hasGrnsh <= hasIng\n"
        "A & B <= C\n"
        "exists r.A <= B\n"
    )
    assert tbox.horn_extended
    assert ConjunctionAxiom("A", "B", "C") in tbox.horn_axioms
    assert QualifiedExistsAxiom(Role("r"), "A", "B") in tbox.horn_axioms


def test_negated_lhs_rejected():
    with pytest.raises(ParseError):
        parse_tbox("!A <= B\n")


def test_tbox_arity_clash():
    with pytest.raises(ParseError):
        parse_tbox("A <= B\nrole: A <= s\n")


def test_fig1_tbox_has_four_axioms(fig1):
    omq, _ = fig1
    assert len(omq.tbox.axioms) + len(omq.tbox.horn_axioms) == 4
    assert omq.tbox.horn_extended


def test_parse_abox_labels_and_autolabels():
    abox = parse_abox("f3: hasIng(sole, sauce)\nFish(stock)\n")
    f3 = abox.by_label("f3")
    assert f3.predicate == "hasIng" and f3.args == ("sole", "sauce")
    auto = abox.by_label("f1")  # second fact, file order
    assert auto.predicate == "Fish"


def test_parse_abox_arity_error():
    with pytest.raises(ParseError):
        parse_abox("f3: Fish(a)\nf4: Fish(a,b)\n")


def test_parse_abox_duplicate_label():
    with pytest.raises(ParseError):
        parse_abox("g: A(c)\ng: B(d)\n")


def test_parse_query_ground_atom():
    ucq = parse_query("FishBased(cancalaiseSole)\n")
    atom = ucq.disjuncts[0].atoms[0]
    assert atom.predicate == "FishBased"
    assert atom.terms[0].is_const


def test_parse_query_disequality():
    ucq = parse_query("r(?x,?y), ?x != ?y\n")
    cq = ucq.disjuncts[0]
    assert len(cq.neq_atoms()) == 1


def test_parse_query_disjuncts():
    ucq = parse_query("A(?x)\nOR\nB(?x)\n")
    assert len(ucq.disjuncts) == 2


def test_parse_query_rejects_cross_component_disequality():
    with pytest.raises(ParseError):
        parse_query("A(?x), B(?y), ?x != ?y\n")


def test_round_trips():
    tbox_text = (
        "Seafood <= FishBased\n"
        "exists r- <= B\n"
        "A <= !exists s\n"
        "role: hasGrnsh <= hasIng\n"
        "A & B <= C\n"
        "exists r.A <= B\n"
    )
    tbox = parse_tbox(tbox_text)
    assert parse_tbox(render_tbox(tbox)) == tbox

    abox_text = "f0: A(c)\nf1: r(c, d)\n"
    abox = parse_abox(abox_text)
    assert parse_abox(render_abox(abox)) == abox

    query_text = "A(?x), r(?x,?y), ?x != ?y\nOR\nB(c)\n"
    ucq = parse_query(query_text)
    assert parse_query(render_query(ucq)) == ucq


def test_comments_and_blanks_skipped():
    tbox = parse_tbox("# header\n\nA <= B  # trailing\n")
    assert len(tbox.axioms) == 1
