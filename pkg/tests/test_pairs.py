import random

import pytest

from gtrs.pairs import (
    CVP,
    LHCP,
    PROPER_CCP,
    canonical_rmap,
    convective_rmap,
    cvps,
    eccps,
    improper_ccps,
    lhcps,
    proper_ccps,
    syntactic_profile,
)
from gtrs.rewriting import UNKNOWN, YES, Engine
from gtrs.systems import EQUIV, ORIENTED, Rule, atom, make_system, rule_type
from gtrs.terms import (
    App,
    ReplacementMap,
    Symbol,
    Var,
    active_positions,
    app,
    nonvar_positions,
    render,
    renaming_for,
    replace_at,
    subterm_at,
    unify,
    variables,
)

x, y = Var("x"), Var("y")


class TestProperCcps:
    def test_cops387_single_pair(self, cops387):
        got = proper_ccps(cops387)
        assert len(got) == 1
        assert got[0].render() == "<f(g(x')), s(x')> <= s(x') == s(0)"
        assert got[0].provenance.position == (1,)
        assert got[0].feasibility == YES

    def test_frozen_arguments_remove_all_pairs(self, cops387_bot):
        assert proper_ccps(cops387_bot) == []

    def test_cops409_simplified_overlay(self, cops409):
        from gtrs.transforms import simplify

        reduced = simplify(cops409)
        got = proper_ccps(reduced)
        rendered = {p.render() for p in got}
        assert (
            "<h(s(x)), g(s(x))> <= c(g(x)) == c(a), c(h(x)) == c(a)" in rendered
            or "<h(s(x')), g(s(x'))> <= c(g(x')) == c(a), c(h(x')) == c(a)"
            in rendered
        )
        assert all(p.is_overlay() for p in got)


class TestImproperCcps:
    def test_type_one_systems_have_none(self, cops387):
        assert improper_ccps(cops387) == []

    def test_unconditional_systems_have_none(self, ex4):
        assert improper_ccps(ex4) == []

    def test_three_rule_overlaps_itself(self):
        f, g = Symbol("f", 1), Symbol("g", 1)
        sys = make_system(
            [f, g],
            [Rule("1", app(f, x), y, (atom(EQUIV, app(g, x), y),))],
            semantics=ORIENTED,
        )
        got = improper_ccps(sys)
        assert len(got) == 1
        pair = got[0]
        assert pair.provenance.kind == "improper-critical-pair"
        assert isinstance(pair.left, Var) and isinstance(pair.right, Var)
        assert pair.left != pair.right
        assert len(pair.conds) == 2


class TestCvps:
    def test_cops387_single_variable_pair(self, cops387):
        got = cvps(cops387)
        assert [p.render() for p in got] == ["<f(g(x')), x> <= x -> x', x == s(0)"]
        assert got[0].provenance.critical_var == "x"

    def test_frozen_lhs_variables_give_none(self, cops387_bot):
        assert cvps(cops387_bot) == []

    def test_ground_lhs_gives_none(self):
        a, b = Symbol("a", 0), Symbol("b", 0)
        sys = make_system([a, b], [Rule("1", app(a), app(b))])
        assert cvps(sys) == []


class TestLhcps:
    def test_top_map_has_none(self, ex4):
        assert lhcps(ex4) == []

    def test_ex4_restricted_has_none(self, ex4_r2):
        sys = ex4_r2.with_mu(convective_rmap(ex4_r2))
        assert lhcps(sys) == []

    def test_variable_frozen_in_rhs(self):
        f, g = Symbol("f", 1), Symbol("g", 1)
        sys = make_system(
            [f, g],
            [Rule("1", app(f, x), app(g, x))],
            mu=ReplacementMap({"f": frozenset({1})}),
        )
        got = lhcps(sys)
        assert len(got) == 1
        assert got[0].render() == "<f(x'), g(x)> <= x -> x'"
        assert got[0].provenance.kind == LHCP

    def test_conditional_system_rejected(self, cops387):
        with pytest.raises(ValueError):
            lhcps(cops387)


class TestEccps:
    def test_cops387_both_pairs(self, cops387):
        got = {p.render() for p in eccps(cops387)}
        assert got == {
            "<f(g(x')), s(x')> <= s(x') == s(0)",
            "<f(g(x')), x> <= x -> x', x == s(0)",
        }

    def test_frozen_variant_empty(self, cops387_bot):
        assert eccps(cops387_bot) == []

    def test_ex4_has_exactly_the_nested_overlap(self, ex4):
        got = eccps(ex4)
        assert len(got) == 1
        assert got[0].provenance.position == (1, 1)
        assert got[0].provenance.rules == ("6", "5")


class TestReplacementMaps:
    def test_cops42_maps(self, cops42):
        can = canonical_rmap(cops42)
        assert can.is_top(cops42.funcs)
        cnv = convective_rmap(cops42)
        assert cnv.indices(Symbol("f", 1)) == frozenset({1})
        assert cnv.indices(Symbol("g", 1)) == frozenset()
        assert cnv.indices(Symbol("h", 2)) == frozenset()

    def test_ex4_maps(self, ex4):
        can = canonical_rmap(ex4)
        for name in ("inc", "hd", "tl"):
            assert can.indices(Symbol(name, 1)) == frozenset({1})
        for name, arity in (("cons", 2), ("from", 1), ("s", 1)):
            assert can.indices(Symbol(name, arity)) == frozenset()
        cnv = convective_rmap(ex4)
        assert cnv.indices(Symbol("inc", 1)) == frozenset({1})
        assert cnv.indices(Symbol("tl", 1)) == frozenset({1})
        assert cnv.indices(Symbol("hd", 1)) == frozenset()

    def test_no_critical_pairs_means_all_frozen(self):
        f, g = Symbol("f", 1), Symbol("g", 1)
        sys = make_system([f, g], [Rule("1", app(f, x), app(g, x))])
        assert convective_rmap(sys).is_bottom()

    def test_convective_at_most_canonical(self, ex4, cops42, canj_incomplete):
        for sys in (ex4, cops42, canj_incomplete):
            assert convective_rmap(sys).leq(canonical_rmap(sys))


class TestSyntacticProfile:
    def test_ex4_canonical_not_level_decreasing(self, ex4):
        sys = ex4.with_mu(canonical_rmap(ex4))
        assert not syntactic_profile(sys).level_decreasing

    def test_ex4_r2_convective_lhrv(self, ex4_r2):
        sys = ex4_r2.with_mu(convective_rmap(ex4_r2))
        assert syntactic_profile(sys).lhrv

    def test_single_projection_rule_orthogonal(self):
        hd, cons = Symbol("hd", 1), Symbol("cons", 2)
        sys = make_system([hd, cons], [Rule("1", app(hd, app(cons, x, y)), x)])
        assert syntactic_profile(sys).weakly_orthogonal

    def test_weak_left_linearity(self, u_wins, extru):
        assert not syntactic_profile(u_wins).weakly_left_linear
        assert syntactic_profile(extru).weakly_left_linear

    def test_determinism(self, cops387, cops409):
        assert syntactic_profile(cops387).deterministic
        assert syntactic_profile(cops409).deterministic


class TestRetainedUnknownPairs:
    def test_unknown_feasibility_is_marked_not_dropped(self):
        # condition with an unbounded search space: feasibility stays open
        f, g, s, a = Symbol("f", 1), Symbol("g", 2), Symbol("s", 1), Symbol("a", 0)
        sys = make_system(
            [f, s, a],
            [
                Rule("1", app(f, x), app(s, x), (atom(EQUIV, x, app(s, x)),)),
                Rule("2", app(f, app(s, x)), x),
            ],
            semantics=ORIENTED,
        )
        got = proper_ccps(sys)
        assert all(p.feasibility in (YES, UNKNOWN) for p in got)


class TestCriticalPositionsActive:
    def test_positions_active_under_mu(self, cops387, ex4, cops409):
        for sys in (cops387, ex4, cops409):
            for pair in proper_ccps(sys):
                outer = next(
                    r for r in sys.rules if r.label == pair.provenance.rules[0]
                )
                assert pair.provenance.position in active_positions(
                    outer.lhs, sys.mu
                )


# ----------------------------------------------------------------------
# brute-force overlap oracle


def brute_force_overlaps(sys):
    """All rule pairs x all non-variable lhs positions x unification."""
    out = set()
    for outer in sys.rules:
        for inner in sys.rules:
            avoid = variables(outer.lhs) | variables(outer.rhs)
            ren = renaming_for(variables(inner.lhs) | variables(inner.rhs), avoid)
            lin, rin = ren.apply(inner.lhs), ren.apply(inner.rhs)
            for p in nonvar_positions(outer.lhs):
                if p == () and inner.label == outer.label:
                    continue
                theta = unify(subterm_at(outer.lhs, p), lin)
                if theta is None:
                    continue
                left = theta.apply(replace_at(outer.lhs, p, rin))
                right = theta.apply(outer.rhs)
                out.add(_canon(left, right))
    return out


def _canon(left, right):
    names = {}

    def c(t):
        if isinstance(t, Var):
            if t.name not in names:
                names[t.name] = f"_{len(names)}"
            return names[t.name]
        return t.sym.name + "(" + ",".join(c(a) for a in t.args) + ")"

    return c(left) + "|" + c(right)


class TestCriticalPairOracle:
    def test_matches_brute_force_on_random_systems(self):
        from test_rewriting import random_trs

        rng = random.Random(77002)
        for i in range(200):
            sys = random_trs(rng, i)
            mine = {
                _canon(p.left, p.right) for p in proper_ccps(sys)
            }
            brute = brute_force_overlaps(sys)
            assert mine == brute, [str(r) for r in sys.rules]
