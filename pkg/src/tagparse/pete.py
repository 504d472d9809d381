"""Entailment checking over transformed derivation graphs.

Both sentences are parsed, transformed, and the hypothesis's content-word
arcs are looked up in the transformed premise with words matched by
surface form (case-insensitive). The default applies the three
transformations introduced for this task; `rules="all"` runs the whole
pipeline, which is reported to help here too.
"""

from __future__ import annotations

from dataclasses import dataclass

from .depgraph import DepGraph
from .rules import PETE_RULES, SupertagLexicon, apply_udr_pipeline, lemma

__all__ = ["pete_check", "PeteResult", "ArcDiagnostic"]

FUNCTION_POS = {
    "DT", "IN", "TO", "CC", "MD", "EX", "POS", "RP", "UH", "PDT",
    "WDT", "WP", "WP$", "WRB", ",", ".", ":", "``", "''", "-LRB-", "-RRB-",
}
FUNCTION_LEMMAS = {"be", "do", "have"}


def _is_content(token) -> bool:
    if token.pos in FUNCTION_POS:
        return False
    if token.pos.startswith("VB") and lemma(token.form) in FUNCTION_LEMMAS:
        return False
    return True


@dataclass(frozen=True)
class ArcDiagnostic:
    child_form: str
    parent_form: str
    label: str
    found: bool


@dataclass
class PeteResult:
    entails: bool
    diagnostics: tuple

    @property
    def verdict(self) -> str:
        return "entails" if self.entails else "not-entails"


def pete_check(premise: DepGraph, hypothesis: DepGraph,
               lexicon: SupertagLexicon | None = None,
               rules: str = "pete") -> PeteResult:
    """Deterministic entailment judgment with per-arc diagnostics."""
    if len(premise) == 0 or len(hypothesis) == 0:
        raise ValueError("pete_check: unparsed (empty) input")
    if rules not in ("pete", "all"):
        raise ValueError(f"pete_check: rules must be 'pete' or 'all', got {rules!r}")
    rule_ids = [rid for rid, _ in PETE_RULES] if rules == "pete" else None
    t_premise, _ = apply_udr_pipeline(premise, lexicon, rules=rule_ids)
    t_hyp, _ = apply_udr_pipeline(hypothesis, lexicon, rules=rule_ids)

    premise_by_form: dict = {}
    for tok in t_premise.tokens:
        premise_by_form.setdefault(tok.lower, []).append(tok.index)

    diagnostics = []
    entails = True
    for arc in sorted(t_hyp.arcs()):
        if arc.parent == 0:
            continue
        child_tok = t_hyp.token(arc.child)
        parent_tok = t_hyp.token(arc.parent)
        if not (_is_content(child_tok) and _is_content(parent_tok)):
            continue
        found = any(
            t_premise.has_arc(c, p, arc.label)
            for c in premise_by_form.get(child_tok.lower, [])
            for p in premise_by_form.get(parent_tok.lower, [])
        )
        diagnostics.append(
            ArcDiagnostic(child_tok.form, parent_tok.form, arc.label, found)
        )
        entails = entails and found
    return PeteResult(entails=entails, diagnostics=tuple(diagnostics))
