import pytest
from hypothesis import given, settings

from mealygroups.automaton import parse_recursion
from mealygroups.element import (AffineUnipotent, Element, Finite, Infinite, PowerSelfSection,
                                 RayOrbit, SectionCapExceeded, SectionOf, SphericallyTransitive,
                                 Unknown, order, verify_certificate)
from mealygroups.group import GroupHandle
from mealygroups.presets import preset

from oracles import cycle_type, level_perm, perm_order
from test_element import _eval, preset_word


def _divisors_below(n):
    return [n // p for p in range(2, n + 1) if n % p == 0 and all(p % q for q in range(2, p))]


@pytest.mark.parametrize("idx, word, n", [
    (752, "a", 2),
    (802, "a", 2),
    (802, "abc", 2),
    (846, "ab", None),
])
def test_known_orders(idx, word, n):
    g = GroupHandle(preset(idx)).element(word)
    v = order(g)
    if n is None:
        assert isinstance(v, Infinite)
    else:
        assert v == Finite(n)


def test_identity_has_order_one():
    assert order(Element.identity()) == Finite(1)
    assert order(GroupHandle(preset(775)).element("c^2")) == Finite(1)


@pytest.mark.parametrize("idx, word", [
    (775, "ba"),
    (849, "a^2c"),
    (741, "b"),
    (843, "c^-1a"),
    (2294, "ca^-1"),
    (875, "b"),
    (891, "cb"),
    (2193, "ab^-1"),
    (2280, "ab"),
    (2852, "ab"),
])
def test_infinite_orders_certified(idx, word):
    g = GroupHandle(preset(idx)).element(word)
    v = order(g)
    assert isinstance(v, Infinite), v
    assert verify_certificate(g, v.certificate)


def test_certificate_rejected_for_other_element():
    G = GroupHandle(preset(843))
    g = G.element("c^-1a")
    cert = order(g).certificate
    assert isinstance(cert, SphericallyTransitive)
    assert not verify_certificate(G.element("a"), cert)
    with pytest.raises(TypeError):
        verify_certificate(g, "not a certificate")


def test_finite_with_false_power_self_section_is_rejected():
    # g = (g, s) fixes 0 with section g and is even, yet has order 2
    A = parse_recursion("g = (g, t)\nt = s(i, i)\ni = (i, i)")
    g = Element.from_state(A, "g")
    assert order(g) == Finite(2)
    bogus = PowerSelfSection(stem=(), stem_power=1, h=g, vertex=(0,), cycle_power=1)
    assert not verify_certificate(g, bogus)


def test_abelian_state_system_803():
    # a = s(b, a), b = (c, c), c = (a, a): transitive by the parity argument
    A = parse_recursion("a = s(b, a)\nb = (c, c)\nc = (a, a)")
    g = Element.from_state(A, "a")
    v = order(g)
    assert isinstance(v, Infinite)
    assert verify_certificate(g, v.certificate)
    for n in range(1, 11):
        assert cycle_type(level_perm(A, ((0, 1),), n)) == [2 ** n]


@given(preset_word(max_len=5))
@settings(max_examples=120, deadline=None)
def test_order_soundness(pw):
    idx, letters = pw
    G = GroupHandle(preset(idx))
    g = _eval(G, letters)
    v = order(g, max_nodes=512)
    if isinstance(v, Finite):
        n = v.order
        assert (g ** n).is_trivial()
        for m in _divisors_below(n):
            assert not (g ** m).is_trivial()
        # the level action has order dividing n
        for k in range(1, 7):
            assert n % perm_order(level_perm(G.automaton, letters, k)) == 0
    elif isinstance(v, Infinite):
        assert verify_certificate(g, v.certificate)
    else:
        assert isinstance(v, Unknown)


@given(preset_word(max_len=4))
@settings(max_examples=60, deadline=None)
def test_infinite_verdict_has_no_small_power_trivial(pw):
    idx, letters = pw
    g = _eval(GroupHandle(preset(idx)), letters)
    v = order(g, max_nodes=512)
    if isinstance(v, Infinite):
        p = g
        try:
            for _ in range(12):
                assert not p.is_trivial()
                p = p * g
        except SectionCapExceeded:
            pass


def test_certificate_kinds_are_reachable():
    kinds = set()
    for idx, word in [(843, "c^-1a"), (775, "ba"), (875, "b"), (891, "cb"), (2280, "ab"),
                      (741, "b"), (849, "a^2c")]:
        v = order(GroupHandle(preset(idx)).element(word))
        kinds.add(type(v.certificate))
    assert SphericallyTransitive in kinds
    assert kinds & {PowerSelfSection, RayOrbit, AffineUnipotent, SectionOf}
