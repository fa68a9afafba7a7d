"""Parsing and serialization of TBox, ABox, query, and result files.

TBox grammar (one axiom per line, '#' comments, blank lines skipped):

    concept-incl  := basic "<=" ["!"] basic
    basic         := NAME | "exists" ROLE
    role-incl     := "role:" ROLE "<=" ["!"] ROLE
    ROLE          := NAME ["-"]
    horn-conj     := NAME "&" NAME "<=" NAME            (Horn extension)
    horn-qexists  := "exists" ROLE "." NAME "<=" NAME   (Horn extension)

ABox lines are "[LABEL:] NAME(const[, const])"; unlabeled facts are
auto-labeled f0, f1, ... in file order.  Query files hold comma-separated
atoms, "?name" variables, bare constants, "t1 != t2" disequalities, and
disjuncts separated by lines containing only OR.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

from .model import (
    ABox,
    Atom,
    Axiom,
    CONCEPT_INCLUSION,
    CQ,
    ConjunctionAxiom,
    Fact,
    QualifiedExistsAxiom,
    ROLE_INCLUSION,
    RespoError,
    Role,
    TBox,
    Term,
    UCQ,
    concept,
    concept_atom,
    connected_components,
    const,
    decimal_approx,
    exists,
    format_rational,
    neq_atom,
    role_atom,
    var,
)


@dataclass(frozen=True)
class ParseDiagnostic:
    line: int
    column: int
    message: str
    severity: str = "error"

    def __str__(self) -> str:
        return f"{self.line}:{self.column}: {self.severity}: {self.message}"


class ParseError(RespoError):
    def __init__(self, diagnostics: list[ParseDiagnostic] | ParseDiagnostic):
        if isinstance(diagnostics, ParseDiagnostic):
            diagnostics = [diagnostics]
        self.diagnostics = diagnostics
        super().__init__("; ".join(str(d) for d in diagnostics))


def _fail(line: int, message: str, column: int = 1):
    raise ParseError(ParseDiagnostic(line, column, message))


_NAME = r"[A-Za-z_][A-Za-z0-9_]*"
_CONSTTOK = r"[A-Za-z0-9_]+"

_ROLE_RE = re.compile(rf"({_NAME})(-?)$")
_FACT_RE = re.compile(
    rf"^(?:({_NAME})\s*:\s*)?({_NAME})\s*\(\s*({_CONSTTOK})\s*(?:,\s*({_CONSTTOK})\s*)?\)$"
)
_HORN_CONJ_RE = re.compile(rf"^({_NAME})\s*&\s*({_NAME})\s*<=\s*({_NAME})$")
_HORN_QEXISTS_RE = re.compile(rf"^exists\s+({_NAME})(-?)\s*\.\s*({_NAME})\s*<=\s*({_NAME})$")


def _lines(text: str):
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield i, line


def _parse_role(token: str, lineno: int) -> Role:
    m = _ROLE_RE.match(token.strip())
    if not m:
        _fail(lineno, f"bad role {token!r}")
    return Role(m.group(1), m.group(2) == "-")


def _parse_basic(token: str, lineno: int):
    token = token.strip()
    if token.startswith("exists"):
        rest = token[len("exists"):].strip()
        if not rest:
            _fail(lineno, "exists needs a role")
        return exists(_parse_role(rest, lineno))
    if not re.fullmatch(_NAME, token):
        _fail(lineno, f"bad concept name {token!r}")
    return concept(token)


class _ArityTracker:
    """Rejects a name used both as a concept and as a role."""

    def __init__(self):
        self.seen: dict[str, str] = {}

    def note(self, name: str, kind: str, lineno: int):
        before = self.seen.setdefault(name, kind)
        if before != kind:
            _fail(lineno, f"{name!r} used as both a {before} and a {kind}")


def parse_tbox(text: str) -> TBox:
    axioms: list[Axiom] = []
    horn: list = []
    arity = _ArityTracker()
    for lineno, line in _lines(text):
        if line.startswith("role:"):
            body = line[len("role:"):]
            if "<=" not in body:
                _fail(lineno, "role inclusion needs '<='")
            lhs_s, rhs_s = body.split("<=", 1)
            negated = False
            rhs_s = rhs_s.strip()
            if rhs_s.startswith("!"):
                negated = True
                rhs_s = rhs_s[1:]
            lhs = _parse_role(lhs_s, lineno)
            rhs = _parse_role(rhs_s, lineno)
            arity.note(lhs.name, "role", lineno)
            arity.note(rhs.name, "role", lineno)
            axioms.append(Axiom(ROLE_INCLUSION, lhs, rhs, negated))
            continue

        m = _HORN_QEXISTS_RE.match(line)
        if m:
            role = Role(m.group(1), m.group(2) == "-")
            arity.note(role.name, "role", lineno)
            arity.note(m.group(3), "concept", lineno)
            arity.note(m.group(4), "concept", lineno)
            horn.append(QualifiedExistsAxiom(role, m.group(3), m.group(4)))
            continue
        m = _HORN_CONJ_RE.match(line)
        if m:
            for name in m.groups():
                arity.note(name, "concept", lineno)
            horn.append(ConjunctionAxiom(m.group(1), m.group(2), m.group(3)))
            continue

        if "<=" not in line:
            _fail(lineno, f"unrecognized axiom {line!r}")
        lhs_s, rhs_s = line.split("<=", 1)
        lhs_s = lhs_s.strip()
        rhs_s = rhs_s.strip()
        if lhs_s.startswith("!"):
            _fail(lineno, "left-hand sides cannot be negated")
        negated = False
        if rhs_s.startswith("!"):
            negated = True
            rhs_s = rhs_s[1:].strip()
        lhs = _parse_basic(lhs_s, lineno)
        rhs = _parse_basic(rhs_s, lineno)
        for side in (lhs, rhs):
            if side.is_name:
                arity.note(side.concept_name, "concept", lineno)
            else:
                arity.note(side.role.name, "role", lineno)
        axioms.append(Axiom(CONCEPT_INCLUSION, lhs, rhs, negated))
    return TBox(frozenset(axioms), frozenset(horn))


def render_tbox(tbox: TBox) -> str:
    lines = []
    for ax in sorted(tbox.axioms, key=repr):
        bang = "!" if ax.negated else ""
        if ax.kind == ROLE_INCLUSION:
            lines.append(f"role: {ax.lhs!r} <= {bang}{ax.rhs!r}")
        else:
            lines.append(f"{_render_basic(ax.lhs)} <= {bang}{_render_basic(ax.rhs)}")
    for ax in sorted(tbox.horn_axioms, key=repr):
        if isinstance(ax, ConjunctionAxiom):
            lines.append(f"{ax.lhs1} & {ax.lhs2} <= {ax.rhs}")
        else:
            lines.append(f"exists {ax.role!r}.{ax.filler} <= {ax.rhs}")
    return "\n".join(lines) + ("\n" if lines else "")


def _render_basic(b) -> str:
    return b.concept_name if b.is_name else f"exists {b.role!r}"


def parse_abox(text: str) -> ABox:
    facts: list[Fact] = []
    arity = _ArityTracker()
    index = 0
    for lineno, line in _lines(text):
        m = _FACT_RE.match(line)
        if not m:
            _fail(lineno, f"bad fact {line!r}")
        label, pred, a1, a2 = m.groups()
        if label is None:
            label = f"f{index}"
        args = (a1,) if a2 is None else (a1, a2)
        arity.note(pred, "concept" if len(args) == 1 else "role", lineno)
        try:
            facts.append(Fact(label, pred, args))
            ABox(tuple(facts))
        except ValueError as exc:
            _fail(lineno, str(exc))
        index += 1
    return ABox(tuple(facts))


def render_abox(abox: ABox) -> str:
    lines = [f"{f.label}: {f.predicate}({', '.join(f.args)})" for f in abox]
    return "\n".join(lines) + ("\n" if lines else "")


# ---------------------------------------------------------------------------
# Queries
# ---------------------------------------------------------------------------

_TERM_RE = re.compile(rf"^\?({_NAME})$|^({_CONSTTOK})$")
_ATOM_RE = re.compile(rf"^({_NAME})\s*\(\s*([^)]*)\s*\)$")
_NEQ_RE = re.compile(r"^(\S+)\s*!=\s*(\S+)$")


def _parse_term(token: str, lineno: int) -> Term:
    m = _TERM_RE.match(token.strip())
    if not m:
        _fail(lineno, f"bad term {token!r}")
    if m.group(1):
        return var(m.group(1))
    return const(m.group(2))


def _split_atoms(line: str):
    """Split on commas that are not inside parentheses."""
    parts, depth, buf = [], 0, []
    for ch in line:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth = max(0, depth - 1)
        if ch == "," and depth == 0:
            parts.append("".join(buf))
            buf = []
        else:
            buf.append(ch)
    parts.append("".join(buf))
    return [p.strip() for p in parts if p.strip()]


def parse_query(text: str, arity: _ArityTracker | None = None) -> UCQ:
    arity = arity or _ArityTracker()
    disjunct_chunks: list[list[tuple[int, str]]] = [[]]
    for lineno, line in _lines(text):
        if line == "OR":
            disjunct_chunks.append([])
            continue
        disjunct_chunks[-1].append((lineno, line))

    disjuncts: list[CQ] = []
    for chunk in disjunct_chunks:
        if not chunk:
            _fail(1, "empty disjunct")
        atoms: list[Atom] = []
        for lineno, line in chunk:
            for atom_s in _split_atoms(line):
                neq = _NEQ_RE.match(atom_s)
                if neq and "(" not in atom_s:
                    t1 = _parse_term(neq.group(1), lineno)
                    t2 = _parse_term(neq.group(2), lineno)
                    if t1 == t2:
                        _fail(lineno, "disequality terms must differ")
                    atoms.append(neq_atom(t1, t2))
                    continue
                m = _ATOM_RE.match(atom_s)
                if not m:
                    _fail(lineno, f"bad atom {atom_s!r}")
                pred, args_s = m.groups()
                terms = [_parse_term(t, lineno) for t in args_s.split(",")] if args_s.strip() else []
                if len(terms) == 1:
                    arity.note(pred, "concept", lineno)
                    atoms.append(concept_atom(pred, terms[0]))
                elif len(terms) == 2:
                    arity.note(pred, "role", lineno)
                    atoms.append(role_atom(pred, terms[0], terms[1]))
                else:
                    _fail(lineno, f"atom {pred!r} needs one or two arguments")
        cq = CQ(tuple(atoms))
        try:
            connected_components(cq)  # validates disequality placement
        except RespoError as exc:
            _fail(chunk[0][0], str(exc))
        disjuncts.append(cq)
    return UCQ(tuple(disjuncts))


def render_term(t: Term) -> str:
    return f"?{t.name}" if t.is_var else str(t.name)


def render_atom(atom: Atom) -> str:
    if not atom.is_relational:
        return f"{render_term(atom.terms[0])} != {render_term(atom.terms[1])}"
    return f"{atom.predicate}({', '.join(render_term(t) for t in atom.terms)})"


def render_cq(cq: CQ) -> str:
    return ", ".join(render_atom(a) for a in cq.atoms)


def render_query(ucq: UCQ) -> str:
    return "\nOR\n".join(render_cq(d) for d in ucq.disjuncts) + "\n"


def check_signature_consistency(tbox: TBox | None, abox: ABox | None, query: UCQ | None):
    """Reject a name used as a concept in one input and a role in another."""
    tracker = _ArityTracker()
    if tbox is not None:
        for name in tbox.concept_names():
            tracker.note(name, "concept", 0)
        for name in tbox.role_names():
            tracker.note(name, "role", 0)
    if abox is not None:
        for f in abox:
            tracker.note(f.predicate, "concept" if f.is_concept else "role", 0)
    if query is not None:
        for d in query.disjuncts:
            for atom in d.relational_atoms():
                tracker.note(
                    atom.predicate,
                    "concept" if len(atom.terms) == 1 else "role",
                    0,
                )


def instantiate_query(ucq: UCQ, bindings: dict[str, str]) -> UCQ:
    """Substitute constants for (answer) variables before scoring."""
    from .queries import substitute

    mapping = {name: const(value) for name, value in bindings.items()}
    return UCQ(tuple(substitute(d, mapping) for d in ucq.disjuncts))


# ---------------------------------------------------------------------------
# Result rendering
# ---------------------------------------------------------------------------

def render_scores_json(scores: dict[str, object]) -> str:
    payload = {
        label: {
            "score": format_rational(value),
            "decimal": decimal_approx(value),
        }
        for label, value in scores.items()
    }
    return json.dumps(payload, indent=2, sort_keys=False) + "\n"


def render_scores_table(scores: dict[str, object]) -> str:
    if not scores:
        return "(no facts)\n"
    width = max(len(label) for label in scores)
    lines = [
        f"{label.ljust(width)}  {format_rational(value):>12}  {decimal_approx(value)}"
        for label, value in scores.items()
    ]
    return "\n".join(lines) + "\n"
