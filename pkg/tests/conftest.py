import pathlib

import pytest

from gtrs.systems import EQUIV, ORIENTED, Rule, atom, make_system
from gtrs.terms import App, ReplacementMap, Symbol, Var, app

FIXTURES = pathlib.Path(__file__).parent / "fixtures"


def fixture_text(name: str) -> str:
    return (FIXTURES / name).read_text(encoding="utf-8")


x, y = Var("x"), Var("y")


def sym(name, arity=0):
    return Symbol(name, arity)


@pytest.fixture(scope="session")
def cops387():
    f, g, s, zero = sym("f", 1), sym("g", 1), sym("s", 1), sym("0")
    return make_system(
        [f, g, s, zero],
        [
            Rule("1", app(g, app(s, x)), app(g, x)),
            Rule("2", app(f, app(g, x)), x, (atom(EQUIV, x, app(s, app(zero))),)),
        ],
        semantics=ORIENTED,
        name="cops387",
    )


@pytest.fixture(scope="session")
def cops387_bot(cops387):
    return cops387.with_mu(ReplacementMap.bottom(), name="cops387-bot")


@pytest.fixture(scope="session")
def cops409():
    b, g, h, c, a, s = sym("b"), sym("g", 1), sym("h", 1), sym("c", 1), sym("a"), sym("s", 1)
    f = sym("f", 2)
    return make_system(
        [b, g, h, f, c, a, s],
        [
            Rule("1", app(b), app(b)),
            Rule("2", app(g, app(s, x)), x),
            Rule("3", app(h, app(s, x)), x),
            Rule("4", app(f, x, y), app(g, app(s, x)),
                 (atom(EQUIV, app(c, app(g, x)), app(c, app(a))),)),
            Rule("5", app(f, x, y), app(h, app(s, x)),
                 (atom(EQUIV, app(c, app(h, x)), app(c, app(a))),)),
        ],
        semantics=ORIENTED,
        name="cops409",
    )


@pytest.fixture(scope="session")
def ex4():
    nats, inc, hd, tl = sym("nats"), sym("inc", 1), sym("hd", 1), sym("tl", 1)
    frm, cons, s, zero = sym("from", 1), sym("cons", 2), sym("s", 1), sym("0")
    return make_system(
        [nats, inc, hd, tl, frm, cons, s, zero],
        [
            Rule("1", app(nats), app(frm, app(zero))),
            Rule("2", app(inc, app(cons, x, y)), app(cons, app(s, x), app(inc, y))),
            Rule("3", app(hd, app(cons, x, y)), x),
            Rule("4", app(tl, app(cons, x, y)), y),
            Rule("5", app(frm, x), app(cons, x, app(frm, app(s, x)))),
            Rule("6", app(inc, app(tl, app(frm, x))), app(tl, app(inc, app(frm, x)))),
        ],
        name="ex4",
    )


@pytest.fixture(scope="session")
def ex4_r2(ex4):
    rules = [r for r in ex4.rules if r.label != "3"]
    funcs = [s for s in ex4.funcs if s.name != "hd"]
    return make_system(funcs, rules, name="ex4-r2")


@pytest.fixture(scope="session")
def hindley():
    a, b, c, d = sym("a"), sym("b"), sym("c"), sym("d")
    return make_system(
        [a, b, c, d],
        [
            Rule("1", app(b), app(a)),
            Rule("2", app(b), x, (atom(EQUIV, app(c), x),)),
            Rule("3", app(c), app(b)),
            Rule("4", app(c), app(d)),
        ],
        semantics=ORIENTED,
        name="hindley",
    )


@pytest.fixture(scope="session")
def extru():
    a, b, c = sym("a"), sym("b"), sym("c")
    return make_system(
        [a, b, c],
        [
            Rule("1", app(a), app(b), (atom(EQUIV, app(a), app(b)),)),
            Rule("2", app(a), app(b), (atom(EQUIV, app(a), app(c)),)),
        ],
        semantics=ORIENTED,
        name="extru",
    )


@pytest.fixture(scope="session")
def u_wins():
    """Terminating system where the plain unraveling proves confluence but
    the shared-symbol variant is not applicable."""
    f, g = sym("f", 1), sym("g", 1)
    return make_system(
        [f, g],
        [
            Rule("1", app(g, x), x),
            Rule("2", app(f, x), x, (atom(EQUIV, app(g, x), x),)),
        ],
        semantics=ORIENTED,
        name="u-wins",
    )


@pytest.fixture(scope="session")
def proctru_incomplete():
    a, b, c = sym("a"), sym("b"), sym("c")
    return make_system(
        [a, b, c],
        [
            Rule("1", app(a), app(b), (atom(EQUIV, app(b), app(a)),)),
            Rule("2", app(a), app(b), (atom(EQUIV, app(c), app(a)),)),
        ],
        semantics=ORIENTED,
        name="proctru",
    )


@pytest.fixture(scope="session")
def canj_incomplete():
    a, b, c, d = sym("a"), sym("b"), sym("c"), sym("d", 1)
    return make_system(
        [a, b, c, d],
        [
            Rule("1", app(a), app(b)),
            Rule("2", app(c), app(d, app(a))),
            Rule("3", app(c), app(d, app(b))),
        ],
        name="canj",
    )


@pytest.fixture(scope="session")
def cops42():
    f, g, h, a = sym("f", 1), sym("g", 1), sym("h", 2), sym("a")
    return make_system(
        [f, g, h, a],
        [
            Rule("1", app(f, app(g, x)), app(f, app(h, x, x))),
            Rule("2", app(g, app(a)), app(g, app(g, app(a)))),
            Rule("3", app(h, app(a), app(a)), app(g, app(g, app(a)))),
        ],
        name="cops42",
    )
