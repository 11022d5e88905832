import json
from fractions import Fraction

import pytest

from sppfix.core import evaluate, parse_system
from sppfix.errors import InvalidRule, ProbabilityMassMismatch
from sppfix.families import back_button, back_button_model
from sppfix.frontends import (
    BackButtonModel,
    Ppda,
    back_button_from_dict,
    back_button_to_dict,
    back_button_to_ppda,
    back_button_to_spp,
    is_strict,
    load_model,
    ppda_to_spp,
)
from sppfix.iterate import StopRule, newton_run
from sppfix.certify import upper_bound_scspp
from sppfix.kernels import simulate_revocation
from sppfix.scalar import BigFloatField

F = Fraction
F256 = BigFloatField(256)


def _mu(sys_):
    return newton_run(sys_, StopRule(max_iters=80), F256).last


# -------------------------------------------------------------- back button


def test_back_button_model_translates_to_reference_system():
    sys_ = back_button_to_spp(back_button_model())
    assert sys_ == back_button()
    assert sys_.is_quadratic() and sys_.constants_positive()


def test_single_page_model():
    sys_ = back_button_to_spp(BackButtonModel.build(["home"], {"home": 1}, {}))
    assert sys_ == parse_system("home = 1")
    assert _mu(sys_) == [1]


def test_back_button_mass_mismatch():
    with pytest.raises(ProbabilityMassMismatch):
        BackButtonModel.build(["A", "B"], {"A": "0.5", "B": 1}, {("A", "B"): "0.4"})


def test_back_button_requires_positive_back_probability():
    with pytest.raises(ProbabilityMassMismatch):
        BackButtonModel.build(["A", "B"], {"A": 0, "B": 1}, {("A", "B"): 1})


def test_back_button_exact_validation_no_float_tolerance():
    # 1/3 + 2/3 is exact; 0.333 + 0.667 = 1 exactly too, 0.3333 + 0.6666 is not
    BackButtonModel.build(["A"], {"A": "1/3"}, {("A", "A"): "2/3"})
    BackButtonModel.build(["A"], {"A": "0.333"}, {("A", "A"): "0.667"})
    with pytest.raises(ProbabilityMassMismatch):
        BackButtonModel.build(["A"], {"A": "0.3333"}, {("A", "A"): "0.6666"})


def test_back_button_json_round_trip():
    model = back_button_model()
    data = back_button_to_dict(model)
    again = back_button_from_dict(json.loads(json.dumps(data)))
    assert back_button_to_spp(again) == back_button_to_spp(model)
    assert isinstance(load_model(json.dumps(data)), BackButtonModel)


def test_translation_mass_at_most_one():
    sys_ = back_button_to_spp(back_button_model())
    for poly in sys_.equations:
        assert sum(poly.coefficients()) <= 1
    assert all(v <= 1 for v in evaluate(sys_, [1] * sys_.n))


# ---------------------------------------------------------------------- pPDA


def _single_state(push, pop):
    return Ppda.build(["p"], ["X"], [("p", "X", push, "p", "XX"), ("p", "X", pop, "p", "")])


@pytest.mark.parametrize(
    "push,pop,text,mu",
    [
        ("1/2", "1/2", "V_p_X_p = 1/2*V_p_X_p^2 + 1/2", 1),
        ("1/3", "2/3", "V_p_X_p = 1/3*V_p_X_p^2 + 2/3", 1),
        ("2/3", "1/3", "V_p_X_p = 2/3*V_p_X_p^2 + 1/3", 0.5),
    ],
)
def test_single_state_ppda(push, pop, text, mu):
    tr = ppda_to_spp(_single_state(push, pop))
    assert tr.system == parse_system(text)
    assert tr.legend == {"V_p_X_p": ("p", "X", "p")}
    got = _mu(tr.system)[0]
    if mu == 1:
        # the critical case converges linearly; 80 steps give about 80 bits
        assert abs(got - 1) < 1e-20
    else:
        assert abs(got - F256.convert(mu)) < F256.ctx.mpf(2) ** -200


def test_ppda_two_states_cleaned_with_legend():
    ppda = Ppda.build(
        ["p", "q"],
        ["X"],
        [("p", "X", "1/2", "q", "XX"), ("p", "X", "1/2", "p", ""), ("q", "X", 1, "p", "")],
    )
    tr = ppda_to_spp(ppda)
    assert tr.system == parse_system("V_p_X_p = 1/2*V_q_X_p*V_p_X_p + 1/2\nV_q_X_p = 1")
    assert set(tr.removed) == {"V_p_X_q", "V_q_X_q"}
    assert tr.legend["V_q_X_p"] == ("q", "X", "p")
    # legend round trip
    for name, triple in tr.legend.items():
        assert tr.variable_of(triple) == name
    assert not is_strict(ppda)


def test_ppda_invalid_rules():
    with pytest.raises(InvalidRule):
        Ppda.build(["p"], ["X"], [("p", "X", 1, "p", "XXX")])
    with pytest.raises(InvalidRule):
        Ppda.build(["p"], ["X"], [("p", "X", 0, "p", ""), ("p", "X", 1, "p", "")])
    with pytest.raises(InvalidRule):
        Ppda.build(["p"], ["X"], [("p", "X", 1, "r", "")])
    with pytest.raises(ProbabilityMassMismatch):
        Ppda.build(["p"], ["X"], [("p", "X", "1/2", "p", "")])


def test_is_strict_examples():
    assert is_strict(_single_state("1/2", "1/2"))
    push_only = Ppda.build(["p"], ["X"], [("p", "X", 1, "p", "XX")])
    assert not is_strict(push_only)
    assert is_strict(back_button_to_ppda(back_button_model()))


def test_back_button_via_ppda_matches_direct_translation():
    tr = ppda_to_spp(back_button_to_ppda(back_button_model()))
    direct = back_button()
    assert [p.as_dict() for p in tr.system.equations] == [p.as_dict() for p in direct.equations]
    assert list(tr.legend.values()) == [("s", "1", "s"), ("s", "2", "s"), ("s", "3", "s")]


def test_ppda_json_loader():
    text = json.dumps(
        {
            "states": ["p"],
            "alphabet": ["X"],
            "rules": [
                {"from": ["p", "X"], "to": ["p", "XX"], "prob": "1/2"},
                {"from": ["p", "X"], "to": ["p", ""], "prob": "1/2"},
            ],
        }
    )
    ppda = load_model(text)
    assert isinstance(ppda, Ppda)
    assert ppda_to_spp(ppda).system == parse_system("V_p_X_p = 0.5*V_p_X_p^2 + 0.5")
    with pytest.raises(InvalidRule):
        load_model('{"foo": 1}')
    with pytest.raises(InvalidRule):
        load_model("not json")


def test_ppda_translation_mass():
    ppda = Ppda.build(
        ["p", "q"],
        ["X", "Y"],
        [
            ("p", "X", "1/4", "q", "XY"),
            ("p", "X", "1/4", "p", "Y"),
            ("p", "X", "1/2", "q", ""),
            ("q", "Y", "1/2", "p", ""),
            ("q", "Y", "1/2", "q", ""),
            ("p", "Y", 1, "p", ""),
            ("q", "X", 1, "q", "X"),
        ],
    )
    tr = ppda_to_spp(ppda)
    # termination mass of (p, X) is split over the target states q
    total = {}
    for (p, x, q), v in zip(tr.legend.values(), _mu(tr.system)):
        total[(p, x)] = total.get((p, x), 0) + v
    assert all(t <= 1 + 1e-60 for t in total.values())


# --------------------------------------------------------------- Monte Carlo


def _mc_check(trials):
    model = back_button_model()
    sys_ = back_button_to_spp(model)
    it = newton_run(sys_, StopRule(max_iters=12), F256).iterates
    cert = upper_bound_scspp(sys_, it[-2], it[-1], F256)
    for k, page in enumerate(model.pages):
        est = simulate_revocation(model, page, trials, seed=17 + k)
        lo, hi = float(cert.lower[k]), float(cert.upper[k])
        gap = max(lo - est.probability, est.probability - hi, 0.0)
        assert gap <= 3 * est.std_error, (page, est, lo, hi)


def test_monte_carlo_agrees_with_certified_interval():
    _mc_check(50_000)


@pytest.mark.slow
def test_monte_carlo_million_trials_per_page():
    _mc_check(1_000_000)
