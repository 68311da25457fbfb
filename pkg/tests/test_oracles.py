import random

from gtrs.oracles import (
    FeasibilityQuery,
    feasible,
    joinable_pair,
    joinable_terms,
    normalizing,
    strongly_joinable_pair,
)
from gtrs.pairs import ConditionalPair, Provenance, eccps, proper_ccps
from gtrs.rewriting import NO, UNKNOWN, YES, Budget, Engine
from gtrs.systems import EQUIV, ORIENTED, REACH, STEP, Rule, atom, make_system
from gtrs.terms import ReplacementMap, Symbol, Var, app, render
from gtrs.termination import find_loop, lpo_orients, removal_measures, terminating
from gtrs.transforms import simplify, unravel_u

x, y, z = Var("x"), Var("y"), Var("z")
xp = Var("x'")


class TestFeasible:
    def test_witnessed_reachability(self, cops387):
        s, zero = Symbol("s", 1), Symbol("0", 0)
        q = FeasibilityQuery(
            cops387, (atom(REACH, app(s, xp), app(s, app(zero))),)
        )
        got = feasible(q)
        assert got.verdict == YES
        assert got.witness.apply(xp) == app(zero)

    def test_nonjoinability_sequence_is_infeasible(self, cops387):
        s, zero, f, g = (
            Symbol("s", 1),
            Symbol("0", 0),
            Symbol("f", 1),
            Symbol("g", 1),
        )
        q = FeasibilityQuery(
            cops387,
            (
                atom(REACH, app(s, xp), app(s, app(zero))),
                atom(REACH, app(f, app(g, xp)), z),
                atom(REACH, app(s, xp), z),
            ),
            frozenset({"z"}),
        )
        assert feasible(q).verdict == NO

    def test_empty_conditions_trivially_hold(self, cops387):
        got = feasible(FeasibilityQuery(cops387, ()))
        assert got.verdict == YES and not got.witness

    def test_monotone_in_budget(self, cops387):
        s, zero = Symbol("s", 1), Symbol("0", 0)
        q = FeasibilityQuery(
            cops387, (atom(REACH, app(s, xp), app(s, app(zero))),)
        )
        small = feasible(q, Budget(max_depth=3, max_steps=500))
        big = feasible(q, Budget(max_depth=10, max_steps=40000))
        if small.verdict in (YES, NO):
            assert small.verdict == big.verdict


class TestJoinableTerms:
    def test_joinable_sides(self, cops409):
        reduced = simplify(cops409)
        h, g, s = Symbol("h", 1), Symbol("g", 1), Symbol("s", 1)
        assert joinable_terms(reduced, app(h, app(s, x)), app(g, app(s, x))) == YES

    def test_disjoint_normal_forms(self, cops387):
        f, g, s, zero = (
            Symbol("f", 1),
            Symbol("g", 1),
            Symbol("s", 1),
            Symbol("0", 0),
        )
        assert (
            joinable_terms(cops387, app(f, app(g, app(zero))), app(s, app(zero)))
            == NO
        )

    def test_reflexive(self, cops387):
        t = app(Symbol("s", 1), app(Symbol("0", 0)))
        assert joinable_terms(cops387, t, t) == YES

    def test_symmetric(self, cops387, cops409):
        f, g, s, zero = (
            Symbol("f", 1),
            Symbol("g", 1),
            Symbol("s", 1),
            Symbol("0", 0),
        )
        pairs = [
            (app(f, app(g, app(zero))), app(s, app(zero))),
            (app(g, app(s, app(zero))), app(g, app(zero))),
        ]
        for a, b in pairs:
            assert joinable_terms(cops387, a, b) == joinable_terms(cops387, b, a)


def _pair(left, right, conds=(), kind="proper-critical-pair", var=None):
    return ConditionalPair(left, right, tuple(conds), Provenance((), (), kind, var))


class TestJoinablePair:
    def test_cops387_pair_not_joinable(self, cops387):
        pair = next(p for p in eccps(cops387) if p.provenance.kind == "proper-critical-pair")
        verdict, ev = joinable_pair(cops387, pair)
        assert verdict == NO
        assert ev.route == "witness-nonjoinable"

    def test_cops409_overlay_joinable(self, cops409):
        reduced = simplify(cops409)
        pair = proper_ccps(reduced)[0]
        verdict, _ = joinable_pair(reduced, pair)
        assert verdict == YES

    def test_trivial_pair(self, cops387):
        t = app(Symbol("s", 1), x)
        verdict, ev = joinable_pair(cops387, _pair(t, t))
        assert verdict == YES and ev.route == "trivial"

    def test_infeasible_conditions_joinable(self, extru):
        a, b, c = Symbol("a", 0), Symbol("b", 0), Symbol("c", 0)
        pair = _pair(app(b), app(c), (atom(EQUIV, app(a), app(b)),))
        verdict, ev = joinable_pair(extru, pair)
        assert verdict == YES and ev.route == "infeasible-conditions"

    def test_nonjoinability_replay(self, cops387):
        """Replaying the recorded witness reproduces the two answers."""
        pair = next(
            p for p in eccps(cops387) if p.provenance.kind == "proper-critical-pair"
        )
        verdict, ev = joinable_pair(cops387, pair)
        assert verdict == NO
        from gtrs.oracles import _join_target_atoms
        from gtrs.systems import apply_atoms

        sigma = ev.witness
        inst_conds = apply_atoms(sigma, pair.conds)
        assert feasible(FeasibilityQuery(cops387, inst_conds)).verdict == YES
        refute = inst_conds + _join_target_atoms(
            sigma.apply(pair.left), sigma.apply(pair.right)
        )
        from gtrs.terms import ground_down

        refute = tuple(
            atom(a.pred, *(ground_down(t) if False else t for t in a.args))
            for a in refute
        )
        assert feasible(FeasibilityQuery(cops387, refute)).verdict == NO


class TestStrongJoinability:
    def test_trivial(self, cops387):
        t = app(Symbol("s", 1), x)
        assert strongly_joinable_pair(cops387, _pair(t, t))[0] == YES

    def test_distinct_normal_forms_refuted(self):
        a, b, c = Symbol("a", 0), Symbol("b", 0), Symbol("c", 0)
        sys = make_system(
            [a, b, c],
            [Rule("1", app(c), app(a)), Rule("2", app(c), app(b))],
        )
        assert strongly_joinable_pair(sys, _pair(app(a), app(b)))[0] == NO

    def test_one_step_join(self):
        b, c, d = Symbol("b", 0), Symbol("c", 0), Symbol("d", 0)
        sys = make_system(
            [b, c, d],
            [Rule("1", app(b), app(d)), Rule("2", app(c), app(d))],
        )
        assert strongly_joinable_pair(sys, _pair(app(b), app(c)))[0] == YES


class TestTerminating:
    def test_cops387_bot_terminates(self, cops387_bot):
        got, evidence = terminating(cops387_bot)
        assert got == YES
        assert "path order" in evidence

    def test_immediate_loop(self):
        a = Symbol("a", 0)
        sys = make_system([a], [Rule("1", app(a), app(a))])
        got, evidence = terminating(sys)
        assert got == NO and "loop" in evidence

    def test_ex4_unfolding_loop(self, ex4):
        got, evidence = terminating(ex4)
        assert got == NO and "from" in evidence

    def test_frozen_unfolding_is_no_loop(self, ex4_r2):
        from gtrs.pairs import convective_rmap

        sys = ex4_r2.with_mu(convective_rmap(ex4_r2))
        assert find_loop(sys) is None
        got, evidence = terminating(sys)
        assert got == YES
        assert "rule removal" in evidence

    def test_self_embedding_rule_is_not_path_orderable(self):
        # terminating, but beyond any simplification order: stays open
        f, g = Symbol("f", 1), Symbol("g", 1)
        sys = make_system(
            [f, g], [Rule("1", app(f, app(f, x)), app(f, app(g, app(f, x))))]
        )
        assert lpo_orients(sys.rules) is None
        got, _ = terminating(sys)
        assert got == UNKNOWN

    def test_orientable_variant_is_accepted(self):
        f, g = Symbol("f", 1), Symbol("g", 1)
        sys = make_system([f, g], [Rule("1", app(f, app(f, x)), app(f, app(g, x)))])
        assert lpo_orients(sys.rules) is not None

    def test_commutativity_is_rejected(self):
        f2 = Symbol("f", 2)
        sys = make_system([f2], [Rule("1", app(f2, x, y), app(f2, y, x))])
        assert lpo_orients(sys.rules) is None

    def test_removal_engine_cannot_prove_the_unrestricted_system(self, ex4_r2):
        assert removal_measures(ex4_r2) is None

    def test_yes_systems_normalize_random_terms(self, cops387_bot, cops409):
        rng = random.Random(99)
        reduced = simplify(cops409)
        for sys in (cops387_bot, reduced):
            got, _ = terminating(sys)
            assert got == YES
            eng = Engine(sys, Budget(max_steps=60000, max_successors=400))
            from gtrs.terms import enumerate_ground_terms

            terms = enumerate_ground_terms(list(sys.funcs), 4, 60)
            sample = [terms[rng.randrange(len(terms))] for _ in range(40)]
            for t in sample:
                current = t
                for _ in range(200):
                    res, complete = eng.one_step(current)
                    if not res:
                        break
                    current = res[0]
                else:
                    raise AssertionError(f"no normal form reached from {render(t)}")


class TestNormalizing:
    def test_terminating_implies_normalizing(self):
        f = Symbol("f", 1)
        sys = make_system([f], [Rule("1", app(f, x), x)])
        got, _ = normalizing(sys)
        assert got == YES

    def test_pure_loop_is_not_certified(self):
        a = Symbol("a", 0)
        sys = make_system([a], [Rule("1", app(a), app(a))])
        got, _ = normalizing(sys)
        assert got == UNKNOWN

    def test_ex4_stays_open(self, ex4):
        got, _ = normalizing(ex4)
        assert got == UNKNOWN

    def test_cyclic_but_normalizing(self, hindley):
        from gtrs.transforms import inline

        sys = inline(hindley)
        got, _ = normalizing(sys)
        assert got == YES

    def test_conditional_rejected(self, cops387):
        import pytest

        with pytest.raises(ValueError):
            normalizing(cops387)


class TestUnravelTermination:
    def test_unraveled_system_orientable(self, u_wins):
        base = unravel_u(u_wins)
        assert lpo_orients(base.rules) is not None
