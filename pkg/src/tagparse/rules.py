"""Derivation-graph transformations and the UDR label conversion.

Rules fire in a fixed order (RULE_ORDER) so earlier additions can feed
later rules; every rule only adds arcs, each tagged with the rule id.
Arc notation throughout: (child, parent, label), the arc pointing from
parent to child.

Rule catalog (trigger -> additions); each pattern has a positive and a
negative fixture in the test suite:

relative-clause      (v, n, adj) where v's supertag is a relative-clause
                     tree with extraction role R and n is a noun
                     -> add (n, v, R)
sentential-complement(a, h, adj) where a's supertag is a predicative
                     auxiliary tree -> add (h, a, "1")
coordination-vp      coordinator c (CC): (c, v1, adj) + (v2, c, "1"), both
                     verbs -> copy v1's subject arcs (label 0) and its
                     modal/negation adjuncts onto v2
coordination-relative coordinator c (CC): (c, v1, adj) + (v2, c, "1")
                     where v1 is a relative-clause predicate modifying
                     noun n, and a wh-pronoun attaches to v2 with label R
                     -> add (n, v2, R)
small-clause         (p, v, L in {1,2}) with v a verb, p a noun/adjective
                     predicate owning a nominal subject (s, p, "0")
                     -> add (s, v, "1")
co-anchor            (co, h, CO) -> copy every arc involving h onto co
                     (both directions, ROOT arcs excluded)
wh-word              (w, wh, adj) with wh a wh-word -> for every arc
                     (wh, p, L) add (w, p, L)
copula-be            complement substitution (x, b, L in {1..4}) into a
                     be-verb b -> add (b, x, "0")
copula-nonbe         (c, p, adj) where c's lemma is stay/become/seem/remain
                     -> copy arcs involving the predicate p onto c
partitive            w in {lot, lots, kind, kinds, none} with child "of"
                     whose object is o -> copy arcs involving w onto o
modal                modal m (MD) with head v; the nearest following
                     verbal adjunct child a of v -> add (m, a, adj)
existential-there    (there, b, "0") -> add (b, there, "0")
determiner-sentence  (d, v, adj) with d a determiner modifying verb v and
                     an adjective child a of d -> add (a, v, "1")
"""

from __future__ import annotations

from dataclasses import dataclass

from .depgraph import Arc, DepGraph, RuleTrace

__all__ = [
    "SupertagLexicon",
    "ConversionContext",
    "convert_udr_label",
    "lemma",
    "apply_rule",
    "apply_udr_pipeline",
    "RULE_ORDER",
    "PETE_RULES",
    "ADJUNCT_LABEL",
    "UDR_INVENTORY",
]

ADJUNCT_LABEL = "adj"
CO_LABEL = "CO"
SUBSTITUTION_LABELS = ("0", "1", "2", "3", "4")
COMPLEMENT_LABELS = ("1", "2", "3", "4")

# lemma exceptions for exactly the word classes the rules inspect
_LEMMAS = {}
for _lemma, _forms in {
    "be": ["am", "is", "are", "was", "were", "be", "been", "being", "'s", "'re", "'m"],
    "stay": ["stay", "stays", "stayed", "staying"],
    "become": ["become", "becomes", "became", "becoming"],
    "seem": ["seem", "seems", "seemed", "seeming"],
    "remain": ["remain", "remains", "remained", "remaining"],
    "have": ["have", "has", "had", "having", "'ve"],
    "do": ["do", "does", "did", "doing"],
    "shut": ["shut", "shuts", "shutting"],
    "open": ["open", "opens", "opened", "opening"],
    "close": ["close", "closes", "closed", "closing"],
    "break": ["break", "breaks", "broke", "broken", "breaking"],
    "turn": ["turn", "turns", "turned", "turning"],
}.items():
    for _f in _forms:
        _LEMMAS[_f] = _lemma


def lemma(form: str) -> str:
    return _LEMMAS.get(form.lower(), form.lower())


NONBE_COPULAS = ("stay", "become", "seem", "remain")
# unaccusative alternators for the subject-embedded conversion exception
CAUSATIVE_ALTERNATORS = ("shut", "open", "close", "break", "turn")
PARTITIVE_WORDS = ("lot", "lots", "kind", "kinds", "none")
NEGATION_FORMS = ("not", "n't", "never")
WH_POS = ("WDT", "WP", "WP$", "WRB")
WH_WORDS = ("what", "who", "whom", "whose", "which", "where", "when", "why", "how")


def is_verb(pos: str) -> bool:
    return pos.startswith("VB") or pos == "MD"


def is_noun(pos: str) -> bool:
    return pos.startswith("NN") or pos in ("PRP", "WP")


def is_adjectival(pos: str) -> bool:
    return pos.startswith("JJ") or pos == "VBN"


def is_wh(token) -> bool:
    return token.pos in WH_POS or token.lower in WH_WORDS


class SupertagLexicon:
    """Elementary-tree properties of supertags.

    The shipped grammar is synthetic, so properties are read from marker
    suffixes: `+rcR` marks a relative-clause tree extracting role R
    (e.g. tVt+rc0), `+pa` marks a predicative auxiliary tree. A real
    grammar can pass explicit maps instead.
    """

    def __init__(self, rc_roles: dict | None = None, pred_aux: set | None = None):
        self._rc_roles = rc_roles
        self._pred_aux = pred_aux

    def rc_role(self, stag: str | None) -> str | None:
        if stag is None:
            return None
        if self._rc_roles is not None:
            return self._rc_roles.get(stag)
        if "+rc" in stag:
            role = stag.split("+rc", 1)[1][:1]
            if role in SUBSTITUTION_LABELS:
                return role
        return None

    def is_pred_aux(self, stag: str | None) -> bool:
        if stag is None:
            return False
        if self._pred_aux is not None:
            return stag in self._pred_aux
        return "+pa" in stag


# ---------------------------------------------------------------------------
# UDR label conversion
# ---------------------------------------------------------------------------

_UDR_ARGUMENT = {"nsubj": "0", "cop": "0",
                 "dobj": "1", "pobj": "1", "obj2": "1", "nsubjpass": "1"}
_UDR_ADJUNCT = ("advmod", "aux", "rcmod", "xcomp", "prep", "det", "amod", "conj")
UDR_INVENTORY = tuple(sorted(set(_UDR_ARGUMENT) | set(_UDR_ADJUNCT)))


@dataclass
class ConversionContext:
    """What the conversion exceptions need to know about the target arc."""

    child_form: str = ""
    child_pos: str = ""
    parent_form: str = ""
    parent_pos: str = ""
    construction: str | None = None


def convert_udr_label(label: str, context: ConversionContext | None = None) -> str:
    """Map a UDR dependency label to the TAG inventory.

    Exceptions: arcs from a verb to a wh-adverb become adjunction, and in
    the subject-embedded construction the subject of an unaccusative
    alternator (hold the door shut) becomes its object.
    """
    if label not in UDR_INVENTORY:
        raise ValueError(f"unknown UDR label {label!r}; inventory: {list(UDR_INVENTORY)}")
    ctx = context or ConversionContext()
    child_is_wh_adverb = ctx.child_pos == "WRB" or ctx.child_form.lower() in (
        "where", "when", "why", "how")
    if is_verb(ctx.parent_pos) and child_is_wh_adverb:
        return ADJUNCT_LABEL
    if (ctx.construction == "SbEm" and label == "nsubj"
            and lemma(ctx.parent_form) in CAUSATIVE_ALTERNATORS):
        return "1"
    if label in _UDR_ARGUMENT:
        return _UDR_ARGUMENT[label]
    return ADJUNCT_LABEL


# ---------------------------------------------------------------------------
# transformation rules
# ---------------------------------------------------------------------------


def _rule_relative_clause(g: DepGraph, lex: SupertagLexicon) -> list:
    added = []
    for child, parent, label in g.sorted_arcs():
        if label != ADJUNCT_LABEL or parent == 0:
            continue
        role = lex.rc_role(g.token(child).stag)
        if role is None or not is_noun(g.token(parent).pos):
            continue
        arc = g.add_arc(parent, child, role, origin="relative-clause")
        if arc:
            added.append(arc)
    return added


def _rule_sentential_complement(g: DepGraph, lex: SupertagLexicon) -> list:
    added = []
    for child, parent, label in g.sorted_arcs():
        if label != ADJUNCT_LABEL or parent == 0:
            continue
        if not lex.is_pred_aux(g.token(child).stag):
            continue
        arc = g.add_arc(parent, child, "1", origin="sentential-complement")
        if arc:
            added.append(arc)
    return added


def _conjunct_pairs(g: DepGraph):
    """(coordinator, first conjunct, second conjunct) triples."""
    for child, parent, label in g.sorted_arcs():
        if label != ADJUNCT_LABEL or parent == 0:
            continue
        c = child
        if g.token(c).pos != "CC":
            continue
        for child2, parent2, label2 in g.sorted_arcs():
            if parent2 == c and label2 == "1":
                yield c, parent, child2


def _rule_coordination_vp(g: DepGraph, lex: SupertagLexicon) -> list:
    added = []
    for _c, v1, v2 in list(_conjunct_pairs(g)):
        if not (is_verb(g.token(v1).pos) and is_verb(g.token(v2).pos)):
            continue
        for arc in sorted(g.arcs_with_parent(v1)):
            child, _, label = arc
            new = None
            if label == "0":
                new = g.add_arc(child, v2, "0", origin="coordination-vp")
            elif label == ADJUNCT_LABEL and (
                g.token(child).pos == "MD" or g.token(child).lower in NEGATION_FORMS
            ):
                new = g.add_arc(child, v2, ADJUNCT_LABEL, origin="coordination-vp")
            if new:
                added.append(new)
    return added


def _rule_coordination_relative(g: DepGraph, lex: SupertagLexicon) -> list:
    added = []
    for _c, v1, v2 in list(_conjunct_pairs(g)):
        if lex.rc_role(g.token(v1).stag) is None:
            continue
        modified = [a.parent for a in g.arcs_with_child(v1)
                    if a.label == ADJUNCT_LABEL and a.parent != 0
                    and is_noun(g.token(a.parent).pos)]
        if not modified:
            continue
        noun = modified[0]
        wh_arcs = [a for a in sorted(g.arcs_with_parent(v2)) if is_wh(g.token(a.child))]
        if not wh_arcs:
            continue
        arc = g.add_arc(noun, v2, wh_arcs[0].label, origin="coordination-relative")
        if arc:
            added.append(arc)
    return added


def _rule_small_clause(g: DepGraph, lex: SupertagLexicon) -> list:
    added = []
    for child, parent, label in g.sorted_arcs():
        if label not in ("1", "2") or parent == 0:
            continue
        p, v = child, parent
        if not is_verb(g.token(v).pos):
            continue
        pos_p = g.token(p).pos
        if not (is_noun(pos_p) or is_adjectival(pos_p)):
            continue
        for sub in sorted(g.arcs_with_parent(p)):
            if sub.label == "0" and is_noun(g.token(sub.child).pos):
                arc = g.add_arc(sub.child, v, "1", origin="small-clause")
                if arc:
                    added.append(arc)
    return added


def _copy_involving(g: DepGraph, source: int, target: int, origin: str,
                    skip=()) -> list:
    """Duplicate every arc touching `source` with `target` in its place."""
    added = []
    for arc in sorted(g.arcs_involving(source)):
        if (arc.child, arc.parent, arc.label) in skip:
            continue
        if arc.child == source:
            if arc.parent in (0, target):
                continue
            new = g.add_arc(target, arc.parent, arc.label, origin=origin)
        else:
            if arc.child == target:
                continue
            new = g.add_arc(arc.child, target, arc.label, origin=origin)
        if new:
            added.append(new)
    return added


def _rule_co_anchor(g: DepGraph, lex: SupertagLexicon) -> list:
    added = []
    for child, parent, label in g.sorted_arcs():
        if label != CO_LABEL or parent == 0:
            continue
        added.extend(
            _copy_involving(g, parent, child, origin="co-anchor",
                            skip=((child, parent, label),))
        )
    return added


def _rule_wh_word(g: DepGraph, lex: SupertagLexicon) -> list:
    added = []
    for child, parent, label in g.sorted_arcs():
        if label != ADJUNCT_LABEL or parent == 0:
            continue
        w, wh = child, parent
        if not is_wh(g.token(wh)):
            continue
        for arc in sorted(g.arcs_with_child(wh)):
            if arc.parent == w:
                continue
            new = g.add_arc(w, arc.parent, arc.label, origin="wh-word")
            if new:
                added.append(new)
    return added


def _rule_copula_be(g: DepGraph, lex: SupertagLexicon) -> list:
    added = []
    for child, parent, label in g.sorted_arcs():
        if label not in COMPLEMENT_LABELS or parent == 0:
            continue
        b = parent
        if lemma(g.token(b).form) != "be" or not is_verb(g.token(b).pos):
            continue
        arc = g.add_arc(b, child, "0", origin="copula-be")
        if arc:
            added.append(arc)
    return added


def _rule_copula_nonbe(g: DepGraph, lex: SupertagLexicon) -> list:
    added = []
    for child, parent, label in g.sorted_arcs():
        if label != ADJUNCT_LABEL or parent == 0:
            continue
        c, p = child, parent
        if not is_verb(g.token(c).pos) or lemma(g.token(c).form) not in NONBE_COPULAS:
            continue
        added.extend(
            _copy_involving(g, p, c, origin="copula-nonbe",
                            skip=((c, p, label),))
        )
    return added


def _rule_partitive(g: DepGraph, lex: SupertagLexicon) -> list:
    added = []
    for w_tok in g.tokens:
        if w_tok.lower not in PARTITIVE_WORDS:
            continue
        w = w_tok.index
        of_nodes = [a.child for a in sorted(g.arcs_with_parent(w))
                    if g.token(a.child).lower == "of"]
        for of_node in of_nodes:
            objects = sorted(g.arcs_with_parent(of_node),
                             key=lambda a: (a.label != "1", a.child))
            if not objects:
                continue
            o = objects[0].child
            added.extend(_copy_involving(g, w, o, origin="partitive"))
    return added


def _rule_modal(g: DepGraph, lex: SupertagLexicon) -> list:
    added = []
    for child, parent, label in g.sorted_arcs():
        if label != ADJUNCT_LABEL or parent == 0:
            continue
        m, v = child, parent
        if g.token(m).pos != "MD":
            continue
        following = [a.child for a in g.arcs_with_parent(v)
                     if a.label == ADJUNCT_LABEL and a.child != m
                     and a.child > m and g.token(a.child).pos.startswith("VB")]
        if not following:
            continue
        a = min(following)
        arc = g.add_arc(m, a, ADJUNCT_LABEL, origin="modal")
        if arc:
            added.append(arc)
    return added


def _rule_existential_there(g: DepGraph, lex: SupertagLexicon) -> list:
    added = []
    for child, parent, label in g.sorted_arcs():
        if label != "0" or parent == 0:
            continue
        t = child
        tok = g.token(t)
        if tok.pos != "EX" and tok.lower != "there":
            continue
        arc = g.add_arc(parent, t, "0", origin="existential-there")
        if arc:
            added.append(arc)
    return added


def _rule_determiner_sentence(g: DepGraph, lex: SupertagLexicon) -> list:
    added = []
    for child, parent, label in g.sorted_arcs():
        if label != ADJUNCT_LABEL or parent == 0:
            continue
        d, v = child, parent
        if g.token(d).pos != "DT" or not is_verb(g.token(v).pos):
            continue
        adjectives = [a.child for a in sorted(g.arcs_with_parent(d))
                      if is_adjectival(g.token(a.child).pos)]
        if not adjectives:
            continue
        arc = g.add_arc(adjectives[0], v, "1", origin="determiner-sentence")
        if arc:
            added.append(arc)
    return added


PETE_RULES = (
    ("relative-clause", _rule_relative_clause),
    ("sentential-complement", _rule_sentential_complement),
    ("coordination-vp", _rule_coordination_vp),
)

RULE_ORDER = PETE_RULES + (
    ("coordination-relative", _rule_coordination_relative),
    ("small-clause", _rule_small_clause),
    ("co-anchor", _rule_co_anchor),
    ("wh-word", _rule_wh_word),
    ("copula-be", _rule_copula_be),
    ("copula-nonbe", _rule_copula_nonbe),
    ("partitive", _rule_partitive),
    ("modal", _rule_modal),
    ("existential-there", _rule_existential_there),
    ("determiner-sentence", _rule_determiner_sentence),
)

_RULES = dict(RULE_ORDER)
RULE_IDS = tuple(rid for rid, _ in RULE_ORDER)


def apply_rule(graph: DepGraph, rule_id: str,
               lexicon: SupertagLexicon | None = None) -> tuple:
    """Apply one rule to a copy of `graph`; returns (new graph, trace entry)."""
    if rule_id not in _RULES:
        raise KeyError(f"unknown rule {rule_id!r}; rules: {list(RULE_IDS)}")
    lexicon = lexicon or SupertagLexicon()
    out = graph.copy()
    added = _RULES[rule_id](out, lexicon)
    return out, (rule_id, tuple(added))


def apply_udr_pipeline(graph: DepGraph, lexicon: SupertagLexicon | None = None,
                       rules=None) -> tuple:
    """Run the documented rule sequence; returns (new graph, RuleTrace)."""
    lexicon = lexicon or SupertagLexicon()
    sequence = RULE_ORDER if rules is None else tuple(
        (rid, _RULES[rid]) for rid in rules
    )
    out = graph.copy()
    trace = RuleTrace()
    for rule_id, fn in sequence:
        added = fn(out, lexicon)
        if added:
            trace.add(rule_id, added)
    return out, trace
