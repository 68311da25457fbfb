import pytest

from gtrs.systems import (
    EQUIV,
    JOIN,
    ORIENTED,
    REACH,
    SEMI_EQUATIONAL,
    STEP,
    HornClause,
    Rule,
    atom,
    classify,
    encode_theory,
    equivalence_clauses,
    make_system,
    recognized_semantics,
    rule_type,
    underlying_trs,
)
from gtrs.terms import ReplacementMap, Symbol, Var, app

x, y = Var("x"), Var("y")
f = Symbol("f", 1)
f2 = Symbol("f", 2)
g = Symbol("g", 1)
h = Symbol("h", 2)
s = Symbol("s", 1)
a = Symbol("a", 0)
b = Symbol("b", 0)
c = Symbol("c", 1)
zero = Symbol("0", 0)


class TestRuleType:
    def test_conditions_covered_by_lhs_is_type_one(self):
        r = Rule("r", app(f, app(g, x)), x, (atom(EQUIV, x, app(s, app(zero))),))
        assert rule_type(r) == 1

    def test_cops409_style_rule_is_type_one(self):
        r = Rule(
            "r",
            app(f2, x, y),
            app(g, app(s, x)),
            (atom(EQUIV, app(c, app(g, x)), app(c, app(a))),),
        )
        assert rule_type(r) == 1

    def test_free_rhs_variable_is_type_four(self):
        r = Rule("r", app(f, x), y)
        assert rule_type(r) == 4

    def test_rhs_variable_bound_by_condition_is_type_three(self):
        r = Rule("r", app(f, x), y, (atom(EQUIV, app(g, x), y),))
        assert rule_type(r) == 3

    def test_unconditional_plain_rule_is_type_one(self):
        assert rule_type(Rule("r", app(f, x), x)) == 1


class TestClassify:
    def test_oriented_ctrs(self, cops387):
        cls = classify(cops387)
        assert cls.base == "CTRS" and cls.semantics == ORIENTED
        assert str(cls) == "O-CTRS"

    def test_context_sensitive_variant(self, cops387_bot):
        cls = classify(cops387_bot)
        assert cls.base == "CS-CTRS" and cls.semantics == ORIENTED

    def test_plain_trs(self):
        g_sys = make_system([f], [Rule("1", app(f, x), x)])
        assert classify(g_sys).base == "TRS"

    def test_cs_trs(self):
        g_sys = make_system(
            [f], [Rule("1", app(f, x), x)], mu=ReplacementMap.bottom()
        )
        assert classify(g_sys).base == "CS-TRS"

    def test_join_and_semiequational_semantics_recognized(self):
        assert recognized_semantics(equivalence_clauses(JOIN)) == JOIN
        assert recognized_semantics(equivalence_clauses(ORIENTED)) == ORIENTED
        assert (
            recognized_semantics(equivalence_clauses(SEMI_EQUATIONAL))
            == SEMI_EQUATIONAL
        )

    def test_extra_clauses_fall_back_to_general_class(self):
        extra = HornClause(atom("path", x, y), (atom(REACH, x, y),))
        g_sys = make_system(
            [f],
            [Rule("1", app(f, x), x, (atom(EQUIV, x, x),))],
            semantics=ORIENTED,
            clauses=[extra],
        )
        assert classify(g_sys).base == "GTRS"

    def test_type_four_unconditional_is_not_a_trs(self):
        g_sys = make_system([f], [Rule("1", app(f, x), y)])
        assert classify(g_sys).base == "GTRS"


class TestEncodeTheory:
    def test_count_formula(self, cops387, cops387_bot, ex4):
        for g_sys in (cops387, cops387_bot, ex4):
            n_prop = sum(len(g_sys.mu.indices(s_)) for s_ in g_sys.funcs)
            want = 2 + n_prop + len(g_sys.clauses) + len(g_sys.rules)
            assert len(encode_theory(g_sys)) == want

    def test_bottom_map_has_five_sentences(self, cops387_bot):
        # reflexivity, compatibility, the ==-clause, one per rule
        sentences = encode_theory(cops387_bot)
        assert len(sentences) == 5
        labels = [s.label for s in sentences]
        assert labels[0] == "Rf" and labels[1] == "Co"
        assert not any(l.startswith("Pr_") for l in labels)

    def test_unary_symbol_with_top_map_adds_one_propagation(self):
        g_sys = make_system([f], [Rule("1", app(f, x), x)])
        labels = [s.label for s in encode_theory(g_sys)]
        assert labels.count("Pr_f,1") == 1

    def test_empty_system_has_reflexivity_and_compatibility_only(self):
        g_sys = make_system([], [], mu=ReplacementMap.bottom())
        labels = [s.label for s in encode_theory(g_sys)]
        assert labels == ["Rf", "Co"]


class TestDefinedSymbols:
    def test_cops387_defined(self, cops387):
        assert {s_.name for s_ in cops387.defined_symbols()} == {"f", "g"}

    def test_empty_rules(self):
        g_sys = make_system([f], [])
        assert g_sys.defined_symbols() == ()

    def test_single_rule(self):
        g_sys = make_system(
            [h, g, a], [Rule("1", app(h, app(a), app(a)), app(g, app(g, app(a))))]
        )
        assert {s_.name for s_ in g_sys.defined_symbols()} == {"h"}


class TestUnderlyingTrs:
    def test_conditions_dropped(self, cops387):
        base = underlying_trs(cops387)
        assert all(not r.conds for r in base.rules)
        assert len(base.rules) == 2
        assert {p.name for p in base.preds} == {STEP, REACH}
        assert not base.clauses

    def test_unconditional_unchanged(self, ex4):
        base = underlying_trs(ex4)
        assert [
            (r.lhs, r.rhs) for r in base.rules
        ] == [(r.lhs, r.rhs) for r in ex4.rules]

    def test_duplicates_collapse(self, extru):
        base = underlying_trs(extru)
        assert len(base.rules) == 1

    def test_mu_preserved(self, cops387_bot):
        assert underlying_trs(cops387_bot).mu == cops387_bot.mu


class TestClassifySerializationStability:
    def test_roundtrip_preserves_class(self, cops387, cops387_bot, ex4, cops409):
        from gtrs.formats import parse, render_system

        for g_sys in (cops387, cops387_bot, ex4, cops409):
            text = render_system(g_sys, "cops")
            back, _ = parse(text)
            assert classify(back) == classify(g_sys)


class TestContainmentInUnderlyingTrs:
    def test_one_step_contained(self, cops387):
        """Every conditional step is a step of the condition-free rules."""
        from gtrs.rewriting import Engine
        from gtrs.terms import enumerate_ground_terms

        eng = Engine(cops387)
        eng_u = Engine(underlying_trs(cops387))
        for t in enumerate_ground_terms(list(cops387.funcs), 3, 60):
            mine, complete = eng.one_step(t)
            base, base_complete = eng_u.one_step(t)
            if complete and base_complete:
                assert set(mine) <= set(base)
