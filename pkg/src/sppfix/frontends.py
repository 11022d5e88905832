"""Stochastic models translated into their termination (revocation) systems.

Back-button processes and probabilistic pushdown automata (pPDAs) are
validated with exact rational arithmetic; a model whose outgoing
probabilities do not sum to exactly one is rejected.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Mapping, Sequence

from .core.dsl import NAME_RE
from .core.graph import clean
from .core.system import Polynomial, SppSystem
from .errors import InvalidRule, ProbabilityMassMismatch
from .scalar import to_fraction

ONE = Fraction(1)


def _prob(value: Any, what: str) -> Fraction:
    try:
        return to_fraction(value)
    except (TypeError, ValueError, ZeroDivisionError):
        raise InvalidRule(f"{what}: cannot read probability {value!r}") from None


def _variable_name(label: str, prefix: str, taken: set[str]) -> str:
    if NAME_RE.match(label) and not label[0].isdigit():
        base = label
    else:
        cleaned = re.sub(r"[^A-Za-z0-9_]", "_", label)
        base = prefix + cleaned
    name, k = base, 2
    while name in taken:
        name = f"{base}_{k}"
        k += 1
    taken.add(name)
    return name


# ---------------------------------------------------------------- back button


@dataclass(frozen=True)
class BackButtonModel:
    """Pages with a back probability ``b_A`` and link probabilities ``l_AB``."""

    pages: tuple[str, ...]
    back_prob: Mapping[str, Fraction]
    links: Mapping[tuple[str, str], Fraction]

    @classmethod
    def build(cls, pages: Sequence[str], back: Mapping[str, Any], links: Mapping[tuple[str, str], Any]) -> "BackButtonModel":
        pages = tuple(str(p) for p in pages)
        model = cls(
            pages,
            {str(a): _prob(b, f"back probability of {a}") for a, b in back.items()},
            {(str(a), str(b)): _prob(p, f"link {a}->{b}") for (a, b), p in links.items()},
        )
        model.validate()
        return model

    def validate(self) -> None:
        if len(set(self.pages)) != len(self.pages):
            raise ProbabilityMassMismatch("duplicate page names")
        known = set(self.pages)
        for page in self.back_prob:
            if page not in known:
                raise ProbabilityMassMismatch(f"back probability given for unknown page {page!r}")
        for (a, b), p in self.links.items():
            if a not in known or b not in known:
                raise ProbabilityMassMismatch(f"link {a!r}->{b!r} mentions an unknown page")
            if p < 0:
                raise ProbabilityMassMismatch(f"link {a!r}->{b!r} has negative probability {p}")
        for page in self.pages:
            b = self.back_prob.get(page, Fraction(0))
            if not 0 < b <= 1:
                raise ProbabilityMassMismatch(f"page {page!r}: back probability must lie in (0, 1], got {b}")
            total = b + sum(self.out_links(page).values(), Fraction(0))
            if total != ONE:
                raise ProbabilityMassMismatch(f"page {page!r}: probabilities sum to {total}, not 1")

    def out_links(self, page: str) -> dict[str, Fraction]:
        return {b: p for (a, b), p in self.links.items() if a == page and p}

    def variable_names(self) -> dict[str, str]:
        taken: set[str] = set()
        return {page: _variable_name(page, "X", taken) for page in self.pages}


def back_button_to_spp(model: BackButtonModel) -> SppSystem:
    """``X_A = b_A + sum_B l_AB * X_B * X_A`` for every page ``A``."""
    model.validate()
    names = model.variable_names()
    index = {page: i for i, page in enumerate(model.pages)}
    eqs = []
    for page in model.pages:
        a = index[page]
        terms = [(p, [index[b], a]) for b, p in model.out_links(page).items()]
        eqs.append(Polynomial.build(terms, model.back_prob[page]))
    return SppSystem(tuple(names[p] for p in model.pages), tuple(eqs))


def back_button_from_dict(data: Mapping[str, Any]) -> BackButtonModel:
    try:
        pages = data["pages"]
        back = data["back"]
        links = data.get("links", {})
    except (KeyError, TypeError):
        raise InvalidRule("back-button model needs 'pages', 'back' and optionally 'links'") from None
    flat = {(a, b): p for a, row in links.items() for b, p in row.items()}
    return BackButtonModel.build(pages, back, flat)


def back_button_to_dict(model: BackButtonModel) -> dict[str, Any]:
    links: dict[str, dict[str, str]] = {}
    for (a, b), p in model.links.items():
        links.setdefault(a, {})[b] = str(p)
    return {
        "pages": list(model.pages),
        "back": {a: str(b) for a, b in model.back_prob.items()},
        "links": links,
    }


# ----------------------------------------------------------------------- pPDA


@dataclass(frozen=True)
class Rule:
    """``p X --prob--> q alpha`` with ``alpha`` a tuple of at most two symbols."""

    state: str
    symbol: str
    prob: Fraction
    target: str
    push: tuple[str, ...]


@dataclass(frozen=True)
class Ppda:
    states: tuple[str, ...]
    alphabet: tuple[str, ...]
    rules: tuple[Rule, ...]

    @classmethod
    def build(cls, states: Sequence[str], alphabet: Sequence[str], rules: Iterable[Sequence[Any]]) -> "Ppda":
        """``rules`` holds ``(p, X, prob, q, alpha)`` tuples; ``alpha`` is a sequence of symbols."""
        built = []
        for p, x, prob, q, alpha in rules:
            built.append(Rule(str(p), str(x), _prob(prob, f"rule {p}{x}"), str(q), tuple(str(s) for s in alpha)))
        ppda = cls(tuple(str(s) for s in states), tuple(str(s) for s in alphabet), tuple(built))
        ppda.validate()
        return ppda

    def validate(self) -> None:
        states, symbols = set(self.states), set(self.alphabet)
        mass: dict[tuple[str, str], Fraction] = {}
        for r in self.rules:
            where = f"rule {r.state} {r.symbol} -> {r.target} {''.join(r.push) or 'eps'}"
            if len(r.push) > 2:
                raise InvalidRule(f"{where}: pushes {len(r.push)} symbols, at most 2 allowed")
            if not 0 < r.prob <= 1:
                raise InvalidRule(f"{where}: probability {r.prob} outside (0, 1]")
            if r.state not in states or r.target not in states:
                raise InvalidRule(f"{where}: unknown control state")
            if r.symbol not in symbols or any(s not in symbols for s in r.push):
                raise InvalidRule(f"{where}: unknown stack symbol")
            key = (r.state, r.symbol)
            mass[key] = mass.get(key, Fraction(0)) + r.prob
        for (p, x), total in mass.items():
            if total != ONE:
                raise ProbabilityMassMismatch(f"rules of {p} {x} sum to {total}, not 1")

    def rules_of(self, p: str, x: str) -> list[Rule]:
        return [r for r in self.rules if r.state == p and r.symbol == x]


@dataclass
class PpdaTranslation:
    system: SppSystem
    legend: dict[str, tuple[str, str, str]]  # variable -> (p, X, q)
    removed: dict[str, tuple[str, str, str]] = field(default_factory=dict)

    def variable_of(self, triple: tuple[str, str, str]) -> str | None:
        for name, t in self.legend.items():
            if t == triple:
                return name
        return None


def ppda_to_spp(ppda: Ppda) -> PpdaTranslation:
    """Termination system over the triples ``[p X q]``, cleaned.

    ``[pXq] = sum_{pX->rYZ} x * sum_t [rYt][tZq] + sum_{pX->rY} x [rYq] + sum_{pX->q eps} x``.
    Triples that stay zero are removed by cleaning and listed in ``removed``.
    """
    ppda.validate()
    triples = [(p, x, q) for p in ppda.states for x in ppda.alphabet for q in ppda.states]
    index = {t: i for i, t in enumerate(triples)}
    taken: set[str] = set()
    names = [_variable_name("V_" + "_".join(t), "", taken) for t in triples]
    eqs = []
    for p, x, q in triples:
        const = Fraction(0)
        terms = []
        for r in ppda.rules_of(p, x):
            if not r.push:
                if r.target == q:
                    const += r.prob
            elif len(r.push) == 1:
                terms.append((r.prob, [index[(r.target, r.push[0], q)]]))
            else:
                y, z = r.push
                for t in ppda.states:
                    terms.append((r.prob, [index[(r.target, y, t)], index[(t, z, q)]]))
        eqs.append(Polynomial.build(terms, const))
    full = SppSystem(tuple(names), tuple(eqs))
    cleaned, removed = clean(full)
    legend_all = dict(zip(names, triples))
    legend = {n: legend_all[n] for n in cleaned.variables}
    return PpdaTranslation(cleaned, legend, {n: legend_all[n] for n in sorted(removed, key=names.index)})


def is_strict(ppda: Ppda) -> bool:
    """Every ``(p, X)`` with rules pops to *every* control state ``q``.

    This is the literal reading; for a single control state it coincides
    with "every ``(p, X)`` with rules has a pop rule".
    """
    for p in ppda.states:
        for x in ppda.alphabet:
            rules = ppda.rules_of(p, x)
            if not rules:
                continue
            pops = {r.target for r in rules if not r.push}
            if pops != set(ppda.states):
                return False
    return True


def back_button_to_ppda(model: BackButtonModel, state: str = "s") -> Ppda:
    """Single-state pPDA: ``A -> B A`` with ``l_AB`` and ``A -> eps`` with ``b_A``."""
    rules = []
    for page in model.pages:
        rules.append((state, page, model.back_prob[page], state, ()))
        for b, p in model.out_links(page).items():
            rules.append((state, page, p, state, (b, page)))
    return Ppda.build([state], model.pages, rules)


def _alpha(value: Any, alphabet: Sequence[str]) -> tuple[str, ...]:
    if isinstance(value, list):
        return tuple(str(s) for s in value)
    text = str(value)
    if all(len(s) == 1 for s in alphabet):
        return tuple(text)
    # multi-character symbols: space separated
    return tuple(text.split())


def ppda_from_dict(data: Mapping[str, Any]) -> Ppda:
    try:
        states, alphabet, raw = data["states"], data["alphabet"], data["rules"]
    except (KeyError, TypeError):
        raise InvalidRule("pPDA model needs 'states', 'alphabet' and 'rules'") from None
    rules = []
    for r in raw:
        try:
            (p, x), (q, alpha), prob = r["from"], r["to"], r["prob"]
        except (KeyError, TypeError, ValueError):
            raise InvalidRule(f"malformed rule {r!r}") from None
        rules.append((p, x, prob, q, _alpha(alpha, alphabet)))
    return Ppda.build(states, alphabet, rules)


def load_model(text: str):
    """Parse a back-button or pPDA model from JSON text."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidRule(f"model file is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise InvalidRule("model file must hold a JSON object")
    if "pages" in data:
        return back_button_from_dict(data)
    if "rules" in data:
        return ppda_from_dict(data)
    raise InvalidRule("unrecognized model: expected 'pages' (back-button) or 'rules' (pPDA)")


def model_to_spp(model) -> tuple[SppSystem, dict[str, Any]]:
    """System plus a legend mapping variables to pages or triples."""
    if isinstance(model, BackButtonModel):
        names = model.variable_names()
        return back_button_to_spp(model), {v: page for page, v in names.items()}
    tr = ppda_to_spp(model)
    return tr.system, {v: list(t) for v, t in tr.legend.items()}
